#pragma once

#include <string>
#include <utility>
#include <vector>

#include "symrewrite/autodiff.hpp"
#include "symrewrite/datagen.hpp"
#include "symrewrite/grammar.hpp"

namespace symrewrite {

struct ModelConfig {
    int embed_dim = 32;
    int hidden_dim = 32;
    int input_vocab = 0;   // |X| + padding token
    int output_vocab = 0;  // |X|*|Y| + BOS/EOS/PAD
    double dropout_p = 0.1;
    int max_decode_len = 47;

    // Vocabulary sizes derived from the grammar; max_decode_len covers
    // rewrites of inputs up to length 15 plus the end marker.
    static ModelConfig for_grammar(const Grammar& g);

    friend bool operator==(const ModelConfig& a, const ModelConfig& b) = default;
};

// Decoder-side ids live in a compact output vocabulary: the grammar's output
// tokens shifted to start at 0, then BOS/EOS/PAD. The encoder keeps grammar
// input ids and appends one PAD id for batching.
struct SpecialTokens {
    int bos;
    int eos;
    int pad;     // decoder padding, excluded from the loss
    int pad_in;  // encoder padding
};

SpecialTokens special_tokens(const Grammar& g);
int output_global_to_local(const Grammar& g, int global_token);
int output_local_to_global(const Grammar& g, int local_token);

// All trainable weights. LSTM gate rows are ordered i, f, g, o; a step
// computes gates = x W_ih^T + h W_hh^T + bias.
struct ModelParams {
    ModelConfig config;
    Parameter in_embed;    // [input_vocab, embed]
    Parameter out_embed;   // [output_vocab, embed]
    Parameter enc_w_ih;    // [4*hidden, embed]
    Parameter enc_w_hh;    // [4*hidden, hidden]
    Parameter enc_bias;    // [4*hidden]
    Parameter dec_w_ih;    // [4*hidden, embed]
    Parameter dec_w_hh;    // [4*hidden, hidden]
    Parameter dec_bias;    // [4*hidden]
    Parameter attn_w;      // [hidden, hidden], score(h_t, h_s) = h_t^T W h_s
    Parameter combine_w;   // [hidden, 2*hidden], applied to [context; h_t]
    Parameter combine_b;   // [hidden]
    Parameter out_w;       // [output_vocab, hidden]
    Parameter out_b;       // [output_vocab]

    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;
};

// Every weight and bias i.i.d. uniform on [-init_range, init_range].
ModelParams init_params(const ModelConfig& config, SplitRng& rng, double init_range = 0.1);

// ---- single-sequence inference ops ----------------------------------------

struct EncodeResult {
    Tensor states;  // [S, hidden], one row per input position
    Tensor h;       // [hidden] final hidden state
    Tensor c;       // [hidden] final cell state
};

EncodeResult encode(const ModelParams& p, const std::vector<int>& input_tokens);

struct AttendResult {
    Tensor context;  // [hidden]
    Tensor weights;  // [S], sums to 1
};

AttendResult attend(const ModelParams& p, const Tensor& dec_hidden, const Tensor& enc_states);

struct DecodeStepResult {
    Tensor logits;  // [output_vocab]
    Tensor h;
    Tensor c;
};

DecodeStepResult decode_step(const ModelParams& p, int prev_local_token, const Tensor& h,
                             const Tensor& c, const Tensor& enc_states);

// ---- training-time forward -------------------------------------------------

// Teacher-forced mean cross entropy over all non-padded target positions of
// the batch. Builds the graph on the tape; callers run tape.backward on the
// returned node. Inputs of unequal length are padded at the end; padded
// encoder positions never update the state and are masked out of attention,
// so the result matches per-sample processing exactly.
Var forward_loss(Tape& tape, ModelParams& p, const std::vector<const Sample*>& batch, bool train,
                 SplitRng& dropout_rng);

double forward_loss_value(ModelParams& p, const std::vector<const Sample*>& batch, bool train,
                          SplitRng& dropout_rng);

// Greedy argmax decoding (ties break to the lowest id). Starts from BOS,
// stops at EOS or after max_decode_len steps, never emits BOS or PAD.
// Returns grammar-global output token ids.
std::vector<int> greedy_decode(const ModelParams& p, const Grammar& g,
                               const std::vector<int>& input_tokens);

// Number of dataset inputs whose greedy decode the grammar accepts. The
// stored gold outputs are ignored; any valid rewrite counts.
int count_valid_decodes(const ModelParams& p, const Grammar& g, const Dataset& d);

// ---- checkpoints ------------------------------------------------------------

struct CheckpointMeta {
    int grammar_inputs = 0;
    int grammar_alphabet = 0;
    int grammar_k = 0;
    BlockPolicy grammar_policy = BlockPolicy::DistinctWithinBlock;
    std::string grammar_hash;
};

void save_checkpoint(const std::string& path, const ModelParams& params, const Grammar& g);
std::pair<ModelParams, CheckpointMeta> load_checkpoint(const std::string& path);

}  // namespace symrewrite
