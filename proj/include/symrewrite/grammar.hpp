#pragma once

#include <string>
#include <vector>

#include "symrewrite/bigint.hpp"
#include "symrewrite/rng.hpp"

namespace symrewrite {

enum class BlockPolicy {
    DistinctWithinBlock,  // the k tokens of a block are pairwise distinct
    WithReplacement,      // any k-sequence over the block's alphabet
};

std::string to_string(BlockPolicy p);
BlockPolicy block_policy_from_string(const std::string& s);

// The symbol-rewriting task: every input symbol owns a private output
// alphabet, and rewriting replaces each input symbol with a block of k
// tokens from that alphabet. Token ids are dense: inputs are 0..n-1 and the
// alphabet of input i occupies n + i*m .. n + (i+1)*m - 1, so two grammars
// built with equal parameters are structurally identical. Immutable after
// construction.
class Grammar {
public:
    Grammar(int num_inputs, int alphabet_size, int k, BlockPolicy policy);

    int num_inputs() const { return num_inputs_; }
    int alphabet_size() const { return alphabet_size_; }
    int k() const { return k_; }
    BlockPolicy block_policy() const { return policy_; }

    bool is_input_token(int token) const { return token >= 0 && token < num_inputs_; }
    bool is_output_token(int token) const {
        return token >= num_inputs_ && token < num_inputs_ + num_inputs_ * alphabet_size_;
    }
    int output_token(int input_symbol, int index) const {
        return num_inputs_ + input_symbol * alphabet_size_ + index;
    }
    // Input symbol whose alphabet contains this output token.
    int owner_of(int output_token) const {
        return (output_token - num_inputs_) / alphabet_size_;
    }
    int total_output_tokens() const { return num_inputs_ * alphabet_size_; }

    std::string token_name(int token) const;
    int token_id(const std::string& name) const;  // throws TokenError on unknown names

    // Draws a uniformly random valid rewrite of the input sequence.
    std::vector<int> generate_output(const std::vector<int>& input, SplitRng& rng) const;

    // True iff output is a valid rewrite of input. Never throws; unknown
    // tokens and malformed lengths simply fail validation.
    bool validate(const std::vector<int>& input, const std::vector<int>& output) const;

    // Exact number of valid outputs for this input.
    BigUint count_valid_outputs(const std::vector<int>& input) const;

    std::string to_text() const;
    static Grammar from_text(const std::string& text);

    void save(const std::string& path) const;
    static Grammar load(const std::string& path);

    friend bool operator==(const Grammar& a, const Grammar& b) {
        return a.num_inputs_ == b.num_inputs_ && a.alphabet_size_ == b.alphabet_size_ &&
               a.k_ == b.k_ && a.policy_ == b.policy_;
    }

private:
    int num_inputs_;
    int alphabet_size_;
    int k_;
    BlockPolicy policy_;
};

}  // namespace symrewrite
