#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "symrewrite/datagen.hpp"
#include "symrewrite/model.hpp"

namespace symrewrite {

struct TrainConfig {
    double learning_rate = 0.125;
    int batch_size = 64;
    double max_grad_norm = 5.0;
    double dropout_p = 0.1;
    double init_range = 0.1;
    int max_epochs = 100;
    uint64_t seed = 1;

    void check() const;
};

enum class StopReason {
    ValPlateauOrDrop,  // validation accuracy decreased or stayed flat
    MaxEpochs,
};

std::string to_string(StopReason r);

struct TrainReport {
    int epochs_run = 0;
    std::vector<double> val_accuracy_per_epoch;
    std::vector<int> val_valid_counts;  // exact numerators behind the accuracies
    std::vector<double> train_loss_per_epoch;
    StopReason stopped_reason = StopReason::MaxEpochs;
    int selected_epoch = 0;
};

// Per-epoch progress record for logging.
struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    int val_valid = 0;
    int val_total = 0;
};

std::string format_epoch_record(const EpochRecord& r);

// If the global L2 norm across every gradient exceeds max_norm, scales all
// gradients by max_norm / norm. Returns the factor applied.
double clip_global_norm(std::vector<Parameter*> params, double max_norm);

// value -= lr * grad, then gradients are zeroed.
void sgd_step(std::vector<Parameter*> params, double learning_rate);

// Counts how many decodes the current parameters get right; compared exactly
// (integers) by the plateau stopping rule.
using Validator = std::function<int(const ModelParams&)>;
using ProgressFn = std::function<void(const EpochRecord&)>;

// One full training run: per epoch, shuffle the training set, take batches
// (final short batch kept), and for each batch do forward / backward /
// clip / SGD. After each epoch the validator scores the model; training
// stops at the first epoch whose count fails to strictly improve on the
// previous one, returning the previous epoch's snapshot.
//
// The seed feeds three independent streams: "init" (weights), "order"
// (per-epoch shuffles), and "dropout" (masks), so each effect can be varied
// in isolation.
std::pair<ModelParams, TrainReport> train_with_validator(
    const Dataset& train_set, int val_total, const ModelConfig& model_config,
    const TrainConfig& config, const Validator& validator, const ProgressFn& progress = nullptr);

std::pair<ModelParams, TrainReport> train(const Grammar& grammar, const Dataset& train_set,
                                          const Dataset& val_set, const ModelConfig& model_config,
                                          const TrainConfig& config,
                                          const ProgressFn& progress = nullptr);

}  // namespace symrewrite
