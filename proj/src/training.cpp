#include "symrewrite/training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "symrewrite/errors.hpp"

namespace symrewrite {

void TrainConfig::check() const {
    if (learning_rate < 0.0 || !std::isfinite(learning_rate)) {
        throw ConfigError("learning rate must be finite and non-negative");
    }
    if (batch_size < 1) {
        throw ConfigError("batch size must be positive");
    }
    if (max_grad_norm <= 0.0) {
        throw ConfigError("max gradient norm must be positive");
    }
    if (dropout_p < 0.0 || dropout_p >= 1.0) {
        throw ConfigError("dropout probability must lie in [0, 1)");
    }
    if (init_range <= 0.0) {
        throw ConfigError("init range must be positive");
    }
    if (max_epochs < 1) {
        throw ConfigError("max epochs must be positive");
    }
}

std::string to_string(StopReason r) {
    return r == StopReason::ValPlateauOrDrop ? "val_plateau_or_drop" : "max_epochs";
}

std::string format_epoch_record(const EpochRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "epoch=%d train_loss=%.6f val_acc=%.6f val_valid=%d/%d",
                  r.epoch, r.train_loss, r.val_total > 0 ? double(r.val_valid) / r.val_total : 0.0,
                  r.val_valid, r.val_total);
    return buf;
}

double clip_global_norm(std::vector<Parameter*> params, double max_norm) {
    if (max_norm <= 0.0) {
        throw ConfigError("max gradient norm must be positive");
    }
    double sq = 0.0;
    for (const Parameter* p : params) {
        for (int64_t i = 0; i < p->grad.numel(); ++i) {
            sq += p->grad[i] * p->grad[i];
        }
    }
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) {
        throw NumericError("gradient norm is non-finite");
    }
    if (norm <= max_norm) {
        return 1.0;
    }
    const double factor = max_norm / norm;
    for (Parameter* p : params) {
        for (int64_t i = 0; i < p->grad.numel(); ++i) {
            p->grad[i] *= factor;
        }
    }
    return factor;
}

void sgd_step(std::vector<Parameter*> params, double learning_rate) {
    for (Parameter* p : params) {
        for (int64_t i = 0; i < p->value.numel(); ++i) {
            p->value[i] -= learning_rate * p->grad[i];
        }
        p->zero_grad();
    }
}

std::pair<ModelParams, TrainReport> train_with_validator(
    const Dataset& train_set, int val_total, const ModelConfig& model_config,
    const TrainConfig& config, const Validator& validator, const ProgressFn& progress) {
    config.check();
    if (train_set.samples.empty()) {
        throw ConfigError("training set is empty");
    }

    ModelConfig mc = model_config;
    mc.dropout_p = config.dropout_p;

    SplitRng root(config.seed);
    SplitRng init_rng = root.split("init");
    SplitRng order_rng = root.split("order");
    SplitRng dropout_rng = root.split("dropout");

    ModelParams params = init_params(mc, init_rng, config.init_range);
    ModelParams previous = params;  // snapshot of the last completed epoch

    TrainReport report;
    const size_t n = train_set.samples.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        SplitRng epoch_rng = order_rng.split(static_cast<uint64_t>(epoch));
        epoch_rng.shuffle(order);

        double loss_sum = 0.0;
        int batches = 0;
        std::vector<const Sample*> batch;
        for (size_t start = 0; start < n; start += static_cast<size_t>(config.batch_size)) {
            const size_t stop = std::min(n, start + static_cast<size_t>(config.batch_size));
            batch.clear();
            for (size_t i = start; i < stop; ++i) {
                batch.push_back(&train_set.samples[order[i]]);
            }
            double batch_loss;
            try {
                Tape tape;
                Var loss = forward_loss(tape, params, batch, /*train=*/true, dropout_rng);
                batch_loss = loss->value[0];
                if (!std::isfinite(batch_loss)) {
                    throw NumericError("loss is non-finite");
                }
                tape.backward(loss);
            } catch (const NumericError& e) {
                throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batches + 1) + ": " + e.what());
            }
            clip_global_norm(params.all(), config.max_grad_norm);
            sgd_step(params.all(), config.learning_rate);
            loss_sum += batch_loss;
            ++batches;
        }

        const int valid = validator(params);
        report.epochs_run = epoch;
        report.val_valid_counts.push_back(valid);
        report.val_accuracy_per_epoch.push_back(val_total > 0 ? double(valid) / val_total : 0.0);
        report.train_loss_per_epoch.push_back(loss_sum / batches);
        if (progress) {
            progress(EpochRecord{epoch, loss_sum / batches, valid, val_total});
        }

        // Stop once the count fails to strictly improve; counts are integers
        // over a fixed denominator so equality is exact.
        if (epoch >= 2 && valid <= report.val_valid_counts[static_cast<size_t>(epoch - 2)]) {
            report.stopped_reason = StopReason::ValPlateauOrDrop;
            report.selected_epoch = epoch - 1;
            return {std::move(previous), std::move(report)};
        }
        previous = params;
    }
    report.stopped_reason = StopReason::MaxEpochs;
    report.selected_epoch = report.epochs_run;
    return {std::move(params), std::move(report)};
}

std::pair<ModelParams, TrainReport> train(const Grammar& grammar, const Dataset& train_set,
                                          const Dataset& val_set, const ModelConfig& model_config,
                                          const TrainConfig& config, const ProgressFn& progress) {
    Validator validator = [&](const ModelParams& p) {
        return count_valid_decodes(p, grammar, val_set);
    };
    return train_with_validator(train_set, static_cast<int>(val_set.samples.size()), model_config,
                                config, validator, progress);
}

}  // namespace symrewrite
