#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "symrewrite/rng.hpp"
#include "symrewrite/tensor.hpp"

namespace symrewrite {

// A trainable value. Gradients accumulate across a backward pass and are
// zeroed by the optimizer step.
struct Parameter {
    Parameter() = default;
    Parameter(std::string name_, Tensor value_)
        : name(std::move(name_)), value(std::move(value_)), grad(value.shape()) {}

    std::string name;
    Tensor value;
    Tensor grad;

    void zero_grad() { grad.fill(0.0); }
};

class Tape;

struct Node {
    Tensor value;
    Tensor grad;  // allocated on first accumulation
    bool requires_grad = false;
    Tape* tape = nullptr;
    Parameter* param = nullptr;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    Tensor& grad_buf() {
        if (grad.empty()) {
            grad = Tensor(value.shape());
        }
        return grad;
    }
};

using Var = std::shared_ptr<Node>;

// Records ops in creation order (already topological) and replays them in
// reverse for the gradient pass. One tape per forward computation.
class Tape {
public:
    // Constant input; gradients do not flow into it.
    Var constant(Tensor value);

    // Leaf bound to a parameter: backward adds the node gradient to param.grad.
    Var leaf(Parameter& p);

    Var make(const char* op, Tensor value, std::vector<Var> parents,
             std::function<void(Node&)> backward_fn);

    // Seeds d(loss)/d(loss) = 1 and propagates to every parameter leaf.
    void backward(const Var& scalar_loss);

    size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    std::vector<Var> nodes_;
};

// ---- op set -------------------------------------------------------------

Var matmul(const Var& a, const Var& b, bool trans_a = false, bool trans_b = false);
Var add(const Var& a, const Var& b);               // same shape
Var add_bias(const Var& x, const Var& bias);       // bias over rows
Var mul(const Var& a, const Var& b);               // elementwise
Var sigmoid(const Var& x);
Var tanh(const Var& x);
Var concat_cols(const Var& a, const Var& b);
Var slice_cols(const Var& x, int64_t start, int64_t len);
Var softmax_rows(const Var& x);
Var scale(const Var& x, double factor);
Var sum_all(const Var& x);  // scalar sum of every entry

// Sum over rows of weight[r] * cross_entropy(logits row r, targets[r]).
// Weights are 0/1 masks for padded positions.
Var cross_entropy_sum(const Var& logits, const std::vector<int>& targets,
                      const std::vector<double>& weights);

// Inverted dropout: keep with prob 1-p and scale kept entries by 1/(1-p).
// Identity when training is off or p == 0.
Var dropout(const Var& x, double p, SplitRng& rng, bool train);

// rows[r] = table.value row ids[r]
Var embedding(const Var& table, const std::vector<int>& ids);

// Stack S tensors of shape [B, D] into [B, S, D].
Var stack_steps(const std::vector<Var>& steps);

// scores[b,s] = sum_d u[b,d] * seq[b,s,d]
Var attn_scores(const Var& u, const Var& seq);

// out[b,d] = sum_s w[b,s] * seq[b,s,d]
Var attn_context(const Var& w, const Var& seq);

// ---- gradient checking ---------------------------------------------------

// Max over all parameter entries of |analytic - numeric| /
// max(|analytic|, |numeric|, 1e-8), with numeric from central differences.
// build_loss must construct a scalar loss from the current parameter values.
double grad_check(const std::function<Var(Tape&)>& build_loss,
                  const std::vector<Parameter*>& params, double eps = 1e-5);

}  // namespace symrewrite
