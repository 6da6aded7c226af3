#include "symrewrite/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "symrewrite/errors.hpp"
#include "symrewrite/hashing.hpp"

namespace symrewrite {

ModelConfig ModelConfig::for_grammar(const Grammar& g) {
    ModelConfig c;
    c.input_vocab = g.num_inputs() + 1;
    c.output_vocab = g.total_output_tokens() + 3;
    c.max_decode_len = g.k() * 15 + 2;
    return c;
}

SpecialTokens special_tokens(const Grammar& g) {
    const int base = g.total_output_tokens();
    return SpecialTokens{base, base + 1, base + 2, g.num_inputs()};
}

int output_global_to_local(const Grammar& g, int global_token) {
    if (!g.is_output_token(global_token)) {
        throw TokenError("token id " + std::to_string(global_token) +
                         " is not a grammar output token");
    }
    return global_token - g.num_inputs();
}

int output_local_to_global(const Grammar& g, int local_token) {
    if (local_token < 0 || local_token >= g.total_output_tokens()) {
        throw TokenError("local output id " + std::to_string(local_token) +
                         " has no grammar token");
    }
    return local_token + g.num_inputs();
}

std::vector<Parameter*> ModelParams::all() {
    return {&in_embed, &out_embed, &enc_w_ih, &enc_w_hh, &enc_bias, &dec_w_ih, &dec_w_hh,
            &dec_bias, &attn_w,    &combine_w, &combine_b, &out_w,   &out_b};
}

std::vector<const Parameter*> ModelParams::all() const {
    return {&in_embed, &out_embed, &enc_w_ih, &enc_w_hh, &enc_bias, &dec_w_ih, &dec_w_hh,
            &dec_bias, &attn_w,    &combine_w, &combine_b, &out_w,   &out_b};
}

ModelParams init_params(const ModelConfig& config, SplitRng& rng, double init_range) {
    if (config.embed_dim < 1 || config.hidden_dim < 1 || config.input_vocab < 1 ||
        config.output_vocab < 1 || config.max_decode_len < 1) {
        throw ConfigError("model config has non-positive sizes");
    }
    if (config.dropout_p < 0.0 || config.dropout_p >= 1.0) {
        throw ConfigError("dropout probability must lie in [0, 1)");
    }
    const int64_t e = config.embed_dim;
    const int64_t h = config.hidden_dim;
    ModelParams p{
        config,
        {"in_embed", Tensor({config.input_vocab, e})},
        {"out_embed", Tensor({config.output_vocab, e})},
        {"enc_w_ih", Tensor({4 * h, e})},
        {"enc_w_hh", Tensor({4 * h, h})},
        {"enc_bias", Tensor({4 * h})},
        {"dec_w_ih", Tensor({4 * h, e})},
        {"dec_w_hh", Tensor({4 * h, h})},
        {"dec_bias", Tensor({4 * h})},
        {"attn_w", Tensor({h, h})},
        {"combine_w", Tensor({h, 2 * h})},
        {"combine_b", Tensor({h})},
        {"out_w", Tensor({config.output_vocab, h})},
        {"out_b", Tensor({config.output_vocab})},
    };
    for (Parameter* param : p.all()) {
        Tensor& v = param->value;
        for (int64_t i = 0; i < v.numel(); ++i) {
            v[i] = rng.uniform(-init_range, init_range);
        }
    }
    return p;
}

namespace {

constexpr double kMaskNegative = -1e30;

// Parameter leaves (training) or constants (inference) bound once per tape.
struct BoundModel {
    int hidden = 0;
    double dropout_p = 0.0;
    Var in_embed, out_embed;
    Var enc_w_ih, enc_w_hh, enc_bias;
    Var dec_w_ih, dec_w_hh, dec_bias;
    Var attn_w, combine_w, combine_b, out_w, out_b;
};

BoundModel bind_model(Tape& tape, ModelParams& p, bool with_grad) {
    auto bind = [&](Parameter& param) {
        return with_grad ? tape.leaf(param) : tape.constant(param.value);
    };
    BoundModel m;
    m.hidden = p.config.hidden_dim;
    m.dropout_p = p.config.dropout_p;
    m.in_embed = bind(p.in_embed);
    m.out_embed = bind(p.out_embed);
    m.enc_w_ih = bind(p.enc_w_ih);
    m.enc_w_hh = bind(p.enc_w_hh);
    m.enc_bias = bind(p.enc_bias);
    m.dec_w_ih = bind(p.dec_w_ih);
    m.dec_w_hh = bind(p.dec_w_hh);
    m.dec_bias = bind(p.dec_bias);
    m.attn_w = bind(p.attn_w);
    m.combine_w = bind(p.combine_w);
    m.combine_b = bind(p.combine_b);
    m.out_w = bind(p.out_w);
    m.out_b = bind(p.out_b);
    return m;
}

struct LstmState {
    Var h;
    Var c;
};

LstmState lstm_step(const BoundModel& m, const Var& w_ih, const Var& w_hh, const Var& bias,
                    const Var& x, const LstmState& prev) {
    const int64_t h = m.hidden;
    Var gates = add_bias(add(matmul(x, w_ih, false, true), matmul(prev.h, w_hh, false, true)), bias);
    Var in_gate = sigmoid(slice_cols(gates, 0, h));
    Var forget_gate = sigmoid(slice_cols(gates, h, h));
    Var cell_cand = tanh(slice_cols(gates, 2 * h, h));
    Var out_gate = sigmoid(slice_cols(gates, 3 * h, h));
    Var c = add(mul(forget_gate, prev.c), mul(in_gate, cell_cand));
    Var hh = mul(out_gate, tanh(c));
    return {hh, c};
}

struct EncoderRun {
    Var states;       // [B, S, H]
    Var h, c;         // [B, H]
    Tensor attn_mask; // [B, S], empty when no padding is present
    int64_t batch = 0;
    int64_t steps = 0;
};

// Runs the encoder over end-padded inputs. Padded positions leave the state
// untouched so the final (h, c) equals the per-sample result, and they are
// masked out of attention.
EncoderRun run_encoder(Tape& tape, const BoundModel& m, const ModelConfig& config,
                       const std::vector<const std::vector<int>*>& inputs, bool train,
                       SplitRng* dropout_rng) {
    const int64_t batch = static_cast<int64_t>(inputs.size());
    const int pad_in = config.input_vocab - 1;
    int64_t steps = 0;
    for (const auto* seq : inputs) {
        steps = std::max<int64_t>(steps, static_cast<int64_t>(seq->size()));
    }
    if (batch == 0 || steps == 0) {
        throw ConfigError("encoder requires a non-empty batch of non-empty inputs");
    }
    bool ragged = false;
    for (const auto* seq : inputs) {
        if (static_cast<int64_t>(seq->size()) != steps) {
            ragged = true;
        }
    }

    LstmState state{tape.constant(Tensor({batch, m.hidden})),
                    tape.constant(Tensor({batch, m.hidden}))};
    std::vector<Var> per_step;
    per_step.reserve(static_cast<size_t>(steps));
    std::vector<int> ids(static_cast<size_t>(batch));
    for (int64_t t = 0; t < steps; ++t) {
        for (int64_t b = 0; b < batch; ++b) {
            const auto& seq = *inputs[static_cast<size_t>(b)];
            ids[static_cast<size_t>(b)] =
                t < static_cast<int64_t>(seq.size()) ? seq[static_cast<size_t>(t)] : pad_in;
        }
        Var x = embedding(m.in_embed, ids);
        if (dropout_rng != nullptr) {
            x = dropout(x, m.dropout_p, *dropout_rng, train);
        }
        LstmState next = lstm_step(m, m.enc_w_ih, m.enc_w_hh, m.enc_bias, x, state);
        if (ragged) {
            Tensor keep({batch, m.hidden});
            Tensor hold({batch, m.hidden});
            for (int64_t b = 0; b < batch; ++b) {
                const bool live = t < static_cast<int64_t>(inputs[static_cast<size_t>(b)]->size());
                for (int64_t d = 0; d < m.hidden; ++d) {
                    keep.at(b, d) = live ? 1.0 : 0.0;
                    hold.at(b, d) = live ? 0.0 : 1.0;
                }
            }
            Var keep_v = tape.constant(std::move(keep));
            Var hold_v = tape.constant(std::move(hold));
            next.h = add(mul(keep_v, next.h), mul(hold_v, state.h));
            next.c = add(mul(keep_v, next.c), mul(hold_v, state.c));
        }
        state = next;
        per_step.push_back(state.h);
    }

    EncoderRun run;
    run.batch = batch;
    run.steps = steps;
    run.states = stack_steps(per_step);
    run.h = state.h;
    run.c = state.c;
    if (ragged) {
        Tensor mask({batch, steps});
        for (int64_t b = 0; b < batch; ++b) {
            const auto len = static_cast<int64_t>(inputs[static_cast<size_t>(b)]->size());
            for (int64_t t = 0; t < steps; ++t) {
                mask.at(b, t) = t < len ? 0.0 : kMaskNegative;
            }
        }
        run.attn_mask = std::move(mask);
    }
    return run;
}

struct DecodeOut {
    Var logits;
    LstmState state;
};

DecodeOut run_decode_step(Tape& tape, const BoundModel& m, const std::vector<int>& prev_ids,
                          const LstmState& prev, const EncoderRun& enc, bool train,
                          SplitRng* dropout_rng) {
    Var x = embedding(m.out_embed, prev_ids);
    if (dropout_rng != nullptr) {
        x = dropout(x, m.dropout_p, *dropout_rng, train);
    }
    LstmState state = lstm_step(m, m.dec_w_ih, m.dec_w_hh, m.dec_bias, x, prev);

    Var u = matmul(state.h, m.attn_w);            // [B, H] row-vector times W
    Var scores = attn_scores(u, enc.states);      // [B, S]
    if (!enc.attn_mask.empty()) {
        scores = add(scores, tape.constant(enc.attn_mask));
    }
    Var weights = softmax_rows(scores);
    Var context = attn_context(weights, enc.states);

    Var combined = concat_cols(context, state.h);
    Var attentional = tanh(add_bias(matmul(combined, m.combine_w, false, true), m.combine_b));
    if (dropout_rng != nullptr) {
        attentional = dropout(attentional, m.dropout_p, *dropout_rng, train);
    }
    Var logits = add_bias(matmul(attentional, m.out_w, false, true), m.out_b);
    return {logits, state};
}

void check_input_tokens(const ModelConfig& config, const std::vector<int>& tokens) {
    for (int t : tokens) {
        if (t < 0 || t >= config.input_vocab) {
            throw TokenError("input token id " + std::to_string(t) +
                             " outside input vocabulary of size " +
                             std::to_string(config.input_vocab));
        }
    }
}

Tensor row_of(const Tensor& t, int64_t r) {
    Tensor out({t.cols()});
    std::copy_n(t.data() + r * t.cols(), t.cols(), out.data());
    return out;
}

}  // namespace

EncodeResult encode(const ModelParams& p, const std::vector<int>& input_tokens) {
    check_input_tokens(p.config, input_tokens);
    const int64_t h = p.config.hidden_dim;
    if (input_tokens.empty()) {
        return EncodeResult{Tensor({0, h}), Tensor({h}), Tensor({h})};
    }
    Tape tape;
    BoundModel m = bind_model(tape, const_cast<ModelParams&>(p), /*with_grad=*/false);
    EncoderRun run = run_encoder(tape, m, p.config, {&input_tokens}, /*train=*/false, nullptr);
    const int64_t s = run.steps;
    Tensor states({s, h});
    std::copy_n(run.states->value.data(), s * h, states.data());
    return EncodeResult{std::move(states), row_of(run.h->value, 0), row_of(run.c->value, 0)};
}

AttendResult attend(const ModelParams& p, const Tensor& dec_hidden, const Tensor& enc_states) {
    const int64_t h = p.config.hidden_dim;
    if (enc_states.rank() != 2 || enc_states.rows() == 0 || enc_states.cols() != h) {
        throw ConfigError("attend requires non-empty encoder states of width " +
                          std::to_string(h) + ", got " + enc_states.shape_str());
    }
    if (dec_hidden.numel() != h) {
        throw ShapeError("decoder hidden state has shape " + dec_hidden.shape_str());
    }
    const int64_t s = enc_states.rows();
    Tape tape;
    Var w = tape.constant(const_cast<ModelParams&>(p).attn_w.value);
    Var ht = tape.constant(Tensor({1, h}, {dec_hidden.data(), dec_hidden.data() + h}));
    Tensor seq({1, s, h});
    std::copy_n(enc_states.data(), s * h, seq.data());
    Var states = tape.constant(std::move(seq));
    Var u = matmul(ht, w);
    Var weights = softmax_rows(attn_scores(u, states));
    Var context = attn_context(weights, states);
    Tensor wout({s});
    std::copy_n(weights->value.data(), s, wout.data());
    return AttendResult{row_of(context->value, 0), std::move(wout)};
}

DecodeStepResult decode_step(const ModelParams& p, int prev_local_token, const Tensor& h,
                             const Tensor& c, const Tensor& enc_states) {
    const int64_t hd = p.config.hidden_dim;
    if (enc_states.rank() != 2 || enc_states.rows() == 0 || enc_states.cols() != hd) {
        throw ConfigError("decode_step requires non-empty encoder states, got " +
                          enc_states.shape_str());
    }
    Tape tape;
    BoundModel m = bind_model(tape, const_cast<ModelParams&>(p), /*with_grad=*/false);
    EncoderRun enc;
    enc.batch = 1;
    enc.steps = enc_states.rows();
    Tensor seq({1, enc.steps, hd});
    std::copy_n(enc_states.data(), enc.steps * hd, seq.data());
    enc.states = tape.constant(std::move(seq));
    LstmState state{tape.constant(Tensor({1, hd}, {h.data(), h.data() + hd})),
                    tape.constant(Tensor({1, hd}, {c.data(), c.data() + hd}))};
    DecodeOut out = run_decode_step(tape, m, {prev_local_token}, state, enc, /*train=*/false,
                                    nullptr);
    return DecodeStepResult{row_of(out.logits->value, 0), row_of(out.state.h->value, 0),
                            row_of(out.state.c->value, 0)};
}

Var forward_loss(Tape& tape, ModelParams& p, const std::vector<const Sample*>& batch, bool train,
                 SplitRng& dropout_rng) {
    if (batch.empty()) {
        throw ConfigError("forward_loss requires a non-empty batch");
    }
    const int out_vocab = p.config.output_vocab;
    const int bos = out_vocab - 3;
    const int eos = out_vocab - 2;
    const int pad = out_vocab - 1;
    const int n_inputs = p.config.input_vocab - 1;

    BoundModel m = bind_model(tape, p, /*with_grad=*/true);
    std::vector<const std::vector<int>*> inputs;
    inputs.reserve(batch.size());
    for (const Sample* s : batch) {
        check_input_tokens(p.config, s->input);
        inputs.push_back(&s->input);
    }
    EncoderRun enc = run_encoder(tape, m, p.config, inputs, train, &dropout_rng);

    // Teacher-forced targets: gold output then EOS; decoder sees BOS then gold.
    int64_t t_max = 0;
    std::vector<std::vector<int>> targets(batch.size());
    for (size_t b = 0; b < batch.size(); ++b) {
        targets[b].reserve(batch[b]->output.size() + 1);
        for (int tok : batch[b]->output) {
            const int local = tok - n_inputs;
            if (local < 0 || local >= out_vocab - 3) {
                throw TokenError("output token id " + std::to_string(tok) +
                                 " outside the output vocabulary");
            }
            targets[b].push_back(local);
        }
        targets[b].push_back(eos);
        t_max = std::max<int64_t>(t_max, static_cast<int64_t>(targets[b].size()));
    }

    LstmState state{enc.h, enc.c};
    Var total;
    double weight_sum = 0.0;
    std::vector<int> prev_ids(batch.size());
    std::vector<int> step_targets(batch.size());
    std::vector<double> step_weights(batch.size());
    for (int64_t t = 0; t < t_max; ++t) {
        for (size_t b = 0; b < batch.size(); ++b) {
            const auto& tgt = targets[b];
            const bool live = t < static_cast<int64_t>(tgt.size());
            prev_ids[b] = t == 0 ? bos
                                 : (t - 1 < static_cast<int64_t>(tgt.size()) ? tgt[static_cast<size_t>(t - 1)]
                                                                             : pad);
            step_targets[b] = live ? tgt[static_cast<size_t>(t)] : pad;
            step_weights[b] = live ? 1.0 : 0.0;
            weight_sum += step_weights[b];
        }
        DecodeOut out = run_decode_step(tape, m, prev_ids, state, enc, train, &dropout_rng);
        state = out.state;
        Var step_loss = cross_entropy_sum(out.logits, step_targets, step_weights);
        total = total ? add(total, step_loss) : step_loss;
    }
    return scale(total, 1.0 / weight_sum);
}

double forward_loss_value(ModelParams& p, const std::vector<const Sample*>& batch, bool train,
                          SplitRng& dropout_rng) {
    Tape tape;
    return forward_loss(tape, p, batch, train, dropout_rng)->value[0];
}

std::vector<int> greedy_decode(const ModelParams& p, const Grammar& g,
                               const std::vector<int>& input_tokens) {
    if (input_tokens.empty()) {
        return {};
    }
    check_input_tokens(p.config, input_tokens);
    const SpecialTokens sp = special_tokens(g);

    Tape tape;
    BoundModel m = bind_model(tape, const_cast<ModelParams&>(p), /*with_grad=*/false);
    EncoderRun enc =
        run_encoder(tape, m, p.config, {&input_tokens}, /*train=*/false, nullptr);
    LstmState state{enc.h, enc.c};

    std::vector<int> out;
    int prev = sp.bos;
    for (int step = 0; step < p.config.max_decode_len; ++step) {
        DecodeOut step_out = run_decode_step(tape, m, {prev}, state, enc, /*train=*/false, nullptr);
        state = step_out.state;
        const Tensor& logits = step_out.logits->value;
        int best = -1;
        double best_v = 0.0;
        for (int v = 0; v < p.config.output_vocab; ++v) {
            if (v == sp.bos || v == sp.pad) {
                continue;  // never emitted
            }
            if (best < 0 || logits[v] > best_v) {
                best = v;
                best_v = logits[v];
            }
        }
        if (best == sp.eos) {
            break;
        }
        out.push_back(output_local_to_global(g, best));
        prev = best;
    }
    return out;
}

int count_valid_decodes(const ModelParams& p, const Grammar& g, const Dataset& d) {
    int valid = 0;
    for (const Sample& s : d.samples) {
        if (g.validate(s.input, greedy_decode(p, g, s.input))) {
            ++valid;
        }
    }
    return valid;
}

// ---- checkpoint io ----------------------------------------------------------

namespace {

void append_le_double(std::string& buf, double v) {
    uint64_t bits = std::bit_cast<uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        buf.push_back(static_cast<char>(bits & 0xff));
        bits >>= 8;
    }
}

double read_le_double(const std::string& buf, size_t pos) {
    uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) {
        bits = (bits << 8) | static_cast<unsigned char>(buf[pos + static_cast<size_t>(i)]);
    }
    return std::bit_cast<double>(bits);
}

std::string take_line(const std::string& buf, size_t& pos) {
    const size_t nl = buf.find('\n', pos);
    if (nl == std::string::npos) {
        throw ParseError("checkpoint truncated");
    }
    std::string line = buf.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params, const Grammar& g) {
    std::string buf;
    buf += "ckpt v1\n";
    {
        char line[256];
        std::snprintf(line, sizeof(line), "grammar inputs=%d alphabet=%d k=%d policy=%s hash=%s\n",
                      g.num_inputs(), g.alphabet_size(), g.k(), to_string(g.block_policy()).c_str(),
                      grammar_fingerprint(g).c_str());
        buf += line;
        std::snprintf(line, sizeof(line),
                      "config embed=%d hidden=%d in_vocab=%d out_vocab=%d dropout=%a max_decode=%d\n",
                      params.config.embed_dim, params.config.hidden_dim, params.config.input_vocab,
                      params.config.output_vocab, params.config.dropout_p,
                      params.config.max_decode_len);
        buf += line;
    }
    for (const Parameter* p : params.all()) {
        buf += "param " + p->name;
        for (int64_t d : p->value.shape()) {
            buf += " " + std::to_string(d);
        }
        buf += "\n";
        for (int64_t i = 0; i < p->value.numel(); ++i) {
            append_le_double(buf, p->value[i]);
        }
        buf += "\n";
    }
    buf += "hash " + hex64(fnv1a64(buf)) + "\n";
    write_file(path, buf);
}

std::pair<ModelParams, CheckpointMeta> load_checkpoint(const std::string& path) {
    const std::string buf = read_file(path);
    size_t pos = 0;
    if (take_line(buf, pos) != "ckpt v1") {
        throw ParseError("not a checkpoint file: " + path, 1);
    }

    CheckpointMeta meta;
    {
        const std::string line = take_line(buf, pos);
        char policy_buf[16] = {0};
        char hash_buf[64] = {0};
        if (std::sscanf(line.c_str(), "grammar inputs=%d alphabet=%d k=%d policy=%15s hash=%63s",
                        &meta.grammar_inputs, &meta.grammar_alphabet, &meta.grammar_k, policy_buf,
                        hash_buf) != 5) {
            throw ParseError("malformed checkpoint grammar line", 2);
        }
        meta.grammar_policy = block_policy_from_string(policy_buf);
        meta.grammar_hash = hash_buf;
    }
    ModelConfig config;
    {
        const std::string line = take_line(buf, pos);
        if (std::sscanf(line.c_str(),
                        "config embed=%d hidden=%d in_vocab=%d out_vocab=%d dropout=%la max_decode=%d",
                        &config.embed_dim, &config.hidden_dim, &config.input_vocab,
                        &config.output_vocab, &config.dropout_p, &config.max_decode_len) != 6) {
            throw ParseError("malformed checkpoint config line", 3);
        }
    }

    SplitRng dummy(0);
    ModelParams params = init_params(config, dummy, 0.0);
    for (Parameter* p : params.all()) {
        std::string line = take_line(buf, pos);
        std::istringstream ls(line);
        std::string tag, name;
        ls >> tag >> name;
        if (tag != "param" || name != p->name) {
            throw ParseError("expected parameter '" + p->name + "', found: " + line);
        }
        std::vector<int64_t> dims;
        int64_t d;
        while (ls >> d) {
            dims.push_back(d);
        }
        if (dims != p->value.shape()) {
            throw ParseError("parameter '" + p->name + "' has unexpected shape in checkpoint");
        }
        const size_t bytes = static_cast<size_t>(p->value.numel()) * 8;
        if (pos + bytes + 1 > buf.size()) {
            throw ParseError("checkpoint truncated in parameter '" + p->name + "'");
        }
        for (int64_t i = 0; i < p->value.numel(); ++i) {
            p->value[i] = read_le_double(buf, pos + static_cast<size_t>(i) * 8);
        }
        pos += bytes;
        if (buf[pos] != '\n') {
            throw ParseError("missing terminator after parameter '" + p->name + "'");
        }
        ++pos;
        if (!p->value.all_finite()) {
            throw NumericError("checkpoint parameter '" + p->name + "' holds non-finite values");
        }
    }

    const size_t body_end = pos;
    const std::string footer = take_line(buf, pos);
    char hash_buf[64] = {0};
    if (std::sscanf(footer.c_str(), "hash %63s", hash_buf) != 1) {
        throw ParseError("checkpoint is missing its integrity footer");
    }
    if (hex64(fnv1a64(buf.substr(0, body_end))) != hash_buf) {
        throw ParseError("checkpoint integrity hash mismatch: " + path);
    }
    return {std::move(params), std::move(meta)};
}

}  // namespace symrewrite
