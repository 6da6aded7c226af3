#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symrewrite/training.hpp"

namespace symrewrite {

extern const std::vector<std::string> kTestSetNames;  // standard, repeat, short, long

struct EvalResult {
    uint64_t seed = 0;
    std::map<std::string, double> accuracy;    // fraction in [0, 1] per test set
    std::map<std::string, int> valid_counts;   // exact numerators
    int set_size = 0;
    int selected_epoch = 0;
    int epochs_run = 0;
    double wall_time_s = 0.0;
};

struct SetStats {
    double mean = 0.0;  // all in percent
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct SweepSummary {
    int runs = 0;
    std::map<std::string, SetStats> per_set;
    std::optional<double> pearson_repeat_long;  // empty when a column is constant
    double best_seed_nonstandard_mean = 0.0;    // percent, mean of repeat/short/long
    uint64_t best_seed = 0;
};

struct FailedSeed {
    uint64_t seed = 0;
    std::string error;
};

struct SweepResult {
    std::vector<EvalResult> results;   // successful seeds, in input order
    std::vector<FailedSeed> failures;  // numeric divergences, never silently dropped
};

// Fraction of dataset inputs whose greedy decode validates. Gold outputs are
// ignored; any grammar-valid rewrite counts.
double accuracy(const ModelParams& params, const Grammar& g, const Dataset& dataset);

// Trains with the given seed and scores the selected checkpoint on the four
// test sets. Deterministic in the seed.
EvalResult run_seed(const Grammar& g, const std::map<std::string, Dataset>& splits,
                    const ModelConfig& model_config, TrainConfig train_config, uint64_t seed);

// Runs seeds across a small worker pool. Results are keyed by position in
// the seed list, so the outcome is identical for any worker count.
SweepResult sweep(const Grammar& g, const std::map<std::string, Dataset>& splits,
                  const ModelConfig& model_config, const TrainConfig& train_config,
                  const std::vector<uint64_t>& seeds, int workers = 1,
                  const std::function<void(const EvalResult&)>& on_result = nullptr);

// Product-moment correlation. Throws InsufficientDataError on fewer than two
// points and NumericError when either column is constant.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Cross-seed statistics in percent; sample (n-1) standard deviation.
SweepSummary summarize(const std::vector<EvalResult>& results);

// ---- results files -----------------------------------------------------------

std::string results_table(const std::vector<EvalResult>& results,
                          const std::vector<FailedSeed>& failures);
std::vector<EvalResult> parse_results_table(const std::string& text);
std::string summary_text(const SweepSummary& s);

}  // namespace symrewrite
