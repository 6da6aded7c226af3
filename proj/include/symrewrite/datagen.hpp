#pragma once

#include <map>
#include <string>
#include <vector>

#include "symrewrite/grammar.hpp"
#include "symrewrite/rng.hpp"

namespace symrewrite {

enum class RepeatMode {
    Forbidden,            // all symbols distinct
    Allowed,              // i.i.d. with replacement
    RequiredAtLeastOne,   // with replacement, resampled until a duplicate exists
};

std::string to_string(RepeatMode m);
RepeatMode repeat_mode_from_string(const std::string& s);

struct DistributionSpec {
    int min_len = 1;
    int max_len = 1;
    RepeatMode repeats = RepeatMode::Forbidden;
    int size = 0;

    // Throws ConfigError if the spec is internally inconsistent or
    // infeasible for the grammar.
    void check(const Grammar& g) const;
};

struct Sample {
    std::vector<int> input;
    std::vector<int> output;

    friend bool operator==(const Sample& a, const Sample& b) {
        return a.input == b.input && a.output == b.output;
    }
};

struct Dataset {
    DistributionSpec spec;
    std::vector<Sample> samples;
    std::string grammar_fingerprint;  // hex hash of the grammar file content
};

std::vector<int> sample_input(const Grammar& g, const DistributionSpec& spec, SplitRng& rng);

Dataset generate_dataset(const Grammar& g, const DistributionSpec& spec, SplitRng& rng);

// The experiment's seven splits, each drawn from its own named sub-stream:
// train (5-10 no-repeat), val_standard, val_tuning (3-12 repeats allowed),
// and the four test distributions. train_size is configurable; every other
// size is fixed by the experiment design.
std::map<std::string, Dataset> paper_splits(const Grammar& g, SplitRng rng,
                                            int train_size = 100000);

extern const std::vector<std::string> kSplitNames;

std::string dataset_to_text(const Grammar& g, const Dataset& d);
// Parses the file against its grammar, validating every sample. With
// check_fingerprint set, a recorded fingerprint that does not match the
// grammar is a CompatError.
Dataset dataset_from_text(const std::string& text, const Grammar& g,
                          bool check_fingerprint = true);

void write_dataset(const std::string& path, const Grammar& g, const Dataset& d);
Dataset read_dataset(const std::string& path, const Grammar& g, bool check_fingerprint = true);

// Fingerprint a grammar the same way generate_dataset records it.
std::string grammar_fingerprint(const Grammar& g);

}  // namespace symrewrite
