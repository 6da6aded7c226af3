#include "symrewrite/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "symrewrite/errors.hpp"

namespace symrewrite {

namespace {

Tape* tape_of(const Var& a) {
    if (!a || !a->tape) {
        throw ShapeError("op applied to a detached node");
    }
    return a->tape;
}

void check_same_tape(const Var& a, const Var& b) {
    if (a->tape != b->tape) {
        throw ShapeError("op applied to nodes from different tapes");
    }
}

void accumulate(Node& parent, const Tensor& delta) {
    Tensor& g = parent.grad_buf();
    const double* src = delta.data();
    double* dst = g.data();
    const int64_t n = g.numel();
    for (int64_t i = 0; i < n; ++i) {
        dst[i] += src[i];
    }
}

}  // namespace

Var Tape::make(const char* op, Tensor value, std::vector<Var> parents,
               std::function<void(Node&)> backward_fn) {
    if (!value.all_finite()) {
        throw NumericError(std::string(op) + " produced a non-finite value");
    }
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->tape = this;
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
    for (const Var& p : node->parents) {
        if (p->requires_grad) {
            node->requires_grad = true;
        }
    }
    nodes_.push_back(node);
    return node;
}

Var Tape::constant(Tensor value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->tape = this;
    nodes_.push_back(node);
    return node;
}

Var Tape::leaf(Parameter& p) {
    if (!p.value.all_finite()) {
        throw NumericError("parameter '" + p.name + "' holds non-finite values");
    }
    auto node = std::make_shared<Node>();
    node->value = p.value;
    node->tape = this;
    node->param = &p;
    node->requires_grad = true;
    node->backward_fn = [](Node& self) {
        Tensor& pg = self.param->grad;
        const double* src = self.grad.data();
        for (int64_t i = 0; i < pg.numel(); ++i) {
            pg[i] += src[i];
        }
    };
    nodes_.push_back(node);
    return node;
}

void Tape::backward(const Var& scalar_loss) {
    if (scalar_loss->value.numel() != 1) {
        throw ShapeError("backward requires a scalar loss, got " + scalar_loss->value.shape_str());
    }
    scalar_loss->grad_buf()[0] = 1.0;
    for (size_t i = nodes_.size(); i-- > 0;) {
        Node& n = *nodes_[i];
        if (n.requires_grad && n.backward_fn && !n.grad.empty()) {
            n.backward_fn(n);
        }
    }
}

// ---- ops ------------------------------------------------------------------

Var matmul(const Var& a, const Var& b, bool trans_a, bool trans_b) {
    check_same_tape(a, b);
    Tensor out;
    gemm(a->value, trans_a, b->value, trans_b, out, false);
    return tape_of(a)->make("matmul", std::move(out), {a, b},
                            [ap = a.get(), bp = b.get(), trans_a, trans_b](Node& self) {
                                const Tensor& g = self.grad;
                                if (ap->requires_grad) {
                                    Tensor& ga = ap->grad_buf();
                                    if (!trans_a && !trans_b) {
                                        gemm(g, false, bp->value, true, ga, true);
                                    } else if (!trans_a && trans_b) {
                                        gemm(g, false, bp->value, false, ga, true);
                                    } else if (trans_a && !trans_b) {
                                        gemm(bp->value, false, g, true, ga, true);
                                    } else {
                                        gemm(bp->value, true, g, true, ga, true);
                                    }
                                }
                                if (bp->requires_grad) {
                                    Tensor& gb = bp->grad_buf();
                                    if (!trans_a && !trans_b) {
                                        gemm(ap->value, true, g, false, gb, true);
                                    } else if (!trans_a && trans_b) {
                                        gemm(g, true, ap->value, false, gb, true);
                                    } else if (trans_a && !trans_b) {
                                        gemm(ap->value, false, g, false, gb, true);
                                    } else {
                                        gemm(g, true, ap->value, true, gb, true);
                                    }
                                }
                            });
}

Var add(const Var& a, const Var& b) {
    check_same_tape(a, b);
    if (!a->value.same_shape(b->value)) {
        throw ShapeError("add shape mismatch: " + shape_pair_str(a->value, b->value));
    }
    Tensor out = a->value;
    const double* bv = b->value.data();
    for (int64_t i = 0; i < out.numel(); ++i) {
        out[i] += bv[i];
    }
    return tape_of(a)->make("add", std::move(out), {a, b}, [ap = a.get(), bp = b.get()](Node& self) {
        if (ap->requires_grad) accumulate(*ap, self.grad);
        if (bp->requires_grad) accumulate(*bp, self.grad);
    });
}

Var add_bias(const Var& x, const Var& bias) {
    check_same_tape(x, bias);
    if (x->value.rank() != 2 || bias->value.rank() != 1 || bias->value.dim(0) != x->value.cols()) {
        throw ShapeError("add_bias shape mismatch: " + shape_pair_str(x->value, bias->value));
    }
    const int64_t rows = x->value.rows();
    const int64_t cols = x->value.cols();
    Tensor out = x->value;
    const double* bv = bias->value.data();
    for (int64_t r = 0; r < rows; ++r) {
        double* row = out.data() + r * cols;
        for (int64_t c = 0; c < cols; ++c) {
            row[c] += bv[c];
        }
    }
    return tape_of(x)->make("add_bias", std::move(out), {x, bias},
                            [xp = x.get(), bp = bias.get(), rows, cols](Node& self) {
                                if (xp->requires_grad) accumulate(*xp, self.grad);
                                if (bp->requires_grad) {
                                    Tensor& gb = bp->grad_buf();
                                    const double* g = self.grad.data();
                                    for (int64_t r = 0; r < rows; ++r) {
                                        for (int64_t c = 0; c < cols; ++c) {
                                            gb[c] += g[r * cols + c];
                                        }
                                    }
                                }
                            });
}

Var mul(const Var& a, const Var& b) {
    check_same_tape(a, b);
    if (!a->value.same_shape(b->value)) {
        throw ShapeError("mul shape mismatch: " + shape_pair_str(a->value, b->value));
    }
    Tensor out = a->value;
    const double* bv = b->value.data();
    for (int64_t i = 0; i < out.numel(); ++i) {
        out[i] *= bv[i];
    }
    return tape_of(a)->make("mul", std::move(out), {a, b}, [ap = a.get(), bp = b.get()](Node& self) {
        const double* g = self.grad.data();
        const int64_t n = self.grad.numel();
        if (ap->requires_grad) {
            Tensor& ga = ap->grad_buf();
            const double* bv = bp->value.data();
            for (int64_t i = 0; i < n; ++i) {
                ga[i] += g[i] * bv[i];
            }
        }
        if (bp->requires_grad) {
            Tensor& gb = bp->grad_buf();
            const double* av = ap->value.data();
            for (int64_t i = 0; i < n; ++i) {
                gb[i] += g[i] * av[i];
            }
        }
    });
}

Var sigmoid(const Var& x) {
    Tensor out = x->value;
    for (int64_t i = 0; i < out.numel(); ++i) {
        out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    }
    return tape_of(x)->make("sigmoid", std::move(out), {x}, [xp = x.get()](Node& self) {
        if (!xp->requires_grad) return;
        Tensor& gx = xp->grad_buf();
        const double* g = self.grad.data();
        const double* y = self.value.data();
        for (int64_t i = 0; i < self.value.numel(); ++i) {
            gx[i] += g[i] * y[i] * (1.0 - y[i]);
        }
    });
}

Var tanh(const Var& x) {
    Tensor out = x->value;
    for (int64_t i = 0; i < out.numel(); ++i) {
        out[i] = std::tanh(out[i]);
    }
    return tape_of(x)->make("tanh", std::move(out), {x}, [xp = x.get()](Node& self) {
        if (!xp->requires_grad) return;
        Tensor& gx = xp->grad_buf();
        const double* g = self.grad.data();
        const double* y = self.value.data();
        for (int64_t i = 0; i < self.value.numel(); ++i) {
            gx[i] += g[i] * (1.0 - y[i] * y[i]);
        }
    });
}

Var concat_cols(const Var& a, const Var& b) {
    check_same_tape(a, b);
    if (a->value.rank() != 2 || b->value.rank() != 2 || a->value.rows() != b->value.rows()) {
        throw ShapeError("concat_cols shape mismatch: " + shape_pair_str(a->value, b->value));
    }
    const int64_t rows = a->value.rows();
    const int64_t ca = a->value.cols();
    const int64_t cb = b->value.cols();
    Tensor out({rows, ca + cb});
    for (int64_t r = 0; r < rows; ++r) {
        std::copy_n(a->value.data() + r * ca, ca, out.data() + r * (ca + cb));
        std::copy_n(b->value.data() + r * cb, cb, out.data() + r * (ca + cb) + ca);
    }
    return tape_of(a)->make("concat_cols", std::move(out), {a, b},
                            [ap = a.get(), bp = b.get(), rows, ca, cb](Node& self) {
                                const double* g = self.grad.data();
                                if (ap->requires_grad) {
                                    Tensor& ga = ap->grad_buf();
                                    for (int64_t r = 0; r < rows; ++r) {
                                        for (int64_t c = 0; c < ca; ++c) {
                                            ga[r * ca + c] += g[r * (ca + cb) + c];
                                        }
                                    }
                                }
                                if (bp->requires_grad) {
                                    Tensor& gb = bp->grad_buf();
                                    for (int64_t r = 0; r < rows; ++r) {
                                        for (int64_t c = 0; c < cb; ++c) {
                                            gb[r * cb + c] += g[r * (ca + cb) + ca + c];
                                        }
                                    }
                                }
                            });
}

Var slice_cols(const Var& x, int64_t start, int64_t len) {
    if (x->value.rank() != 2 || start < 0 || len <= 0 || start + len > x->value.cols()) {
        throw ShapeError("slice_cols out of range for " + x->value.shape_str());
    }
    const int64_t rows = x->value.rows();
    const int64_t cols = x->value.cols();
    Tensor out({rows, len});
    for (int64_t r = 0; r < rows; ++r) {
        std::copy_n(x->value.data() + r * cols + start, len, out.data() + r * len);
    }
    return tape_of(x)->make("slice_cols", std::move(out), {x},
                            [xp = x.get(), start, len, rows, cols](Node& self) {
                                if (!xp->requires_grad) return;
                                Tensor& gx = xp->grad_buf();
                                const double* g = self.grad.data();
                                for (int64_t r = 0; r < rows; ++r) {
                                    for (int64_t c = 0; c < len; ++c) {
                                        gx[r * cols + start + c] += g[r * len + c];
                                    }
                                }
                            });
}

Var softmax_rows(const Var& x) {
    if (x->value.rank() != 2) {
        throw ShapeError("softmax_rows expects 2-D input, got " + x->value.shape_str());
    }
    const int64_t rows = x->value.rows();
    const int64_t cols = x->value.cols();
    Tensor out = x->value;
    for (int64_t r = 0; r < rows; ++r) {
        double* row = out.data() + r * cols;
        double mx = row[0];
        for (int64_t c = 1; c < cols; ++c) {
            mx = std::max(mx, row[c]);
        }
        double sum = 0.0;
        for (int64_t c = 0; c < cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            sum += row[c];
        }
        for (int64_t c = 0; c < cols; ++c) {
            row[c] /= sum;
        }
    }
    return tape_of(x)->make("softmax_rows", std::move(out), {x},
                            [xp = x.get(), rows, cols](Node& self) {
                                if (!xp->requires_grad) return;
                                Tensor& gx = xp->grad_buf();
                                const double* g = self.grad.data();
                                const double* y = self.value.data();
                                for (int64_t r = 0; r < rows; ++r) {
                                    double dot = 0.0;
                                    for (int64_t c = 0; c < cols; ++c) {
                                        dot += g[r * cols + c] * y[r * cols + c];
                                    }
                                    for (int64_t c = 0; c < cols; ++c) {
                                        gx[r * cols + c] +=
                                            y[r * cols + c] * (g[r * cols + c] - dot);
                                    }
                                }
                            });
}

Var scale(const Var& x, double factor) {
    Tensor out = x->value;
    for (int64_t i = 0; i < out.numel(); ++i) {
        out[i] *= factor;
    }
    return tape_of(x)->make("scale", std::move(out), {x}, [xp = x.get(), factor](Node& self) {
        if (!xp->requires_grad) return;
        Tensor& gx = xp->grad_buf();
        const double* g = self.grad.data();
        for (int64_t i = 0; i < self.grad.numel(); ++i) {
            gx[i] += factor * g[i];
        }
    });
}

Var sum_all(const Var& x) {
    double total = 0.0;
    for (int64_t i = 0; i < x->value.numel(); ++i) {
        total += x->value[i];
    }
    return tape_of(x)->make("sum_all", Tensor::scalar(total), {x}, [xp = x.get()](Node& self) {
        if (!xp->requires_grad) return;
        Tensor& gx = xp->grad_buf();
        const double g = self.grad[0];
        for (int64_t i = 0; i < gx.numel(); ++i) {
            gx[i] += g;
        }
    });
}

Var cross_entropy_sum(const Var& logits, const std::vector<int>& targets,
                      const std::vector<double>& weights) {
    if (logits->value.rank() != 2) {
        throw ShapeError("cross_entropy_sum expects 2-D logits, got " + logits->value.shape_str());
    }
    const int64_t rows = logits->value.rows();
    const int64_t cols = logits->value.cols();
    if (static_cast<int64_t>(targets.size()) != rows ||
        static_cast<int64_t>(weights.size()) != rows) {
        throw ShapeError("cross_entropy_sum target/weight count does not match logit rows");
    }
    std::vector<double> lse(static_cast<size_t>(rows));
    double total = 0.0;
    for (int64_t r = 0; r < rows; ++r) {
        const int t = targets[static_cast<size_t>(r)];
        if (t < 0 || t >= cols) {
            throw TokenError("cross_entropy target id " + std::to_string(t) +
                             " outside vocabulary of size " + std::to_string(cols));
        }
        const double* row = logits->value.data() + r * cols;
        double mx = row[0];
        for (int64_t c = 1; c < cols; ++c) {
            mx = std::max(mx, row[c]);
        }
        double sum = 0.0;
        for (int64_t c = 0; c < cols; ++c) {
            sum += std::exp(row[c] - mx);
        }
        lse[static_cast<size_t>(r)] = mx + std::log(sum);
        total += weights[static_cast<size_t>(r)] *
                 (lse[static_cast<size_t>(r)] - row[t]);
    }
    return tape_of(logits)->make(
        "cross_entropy_sum", Tensor::scalar(total), {logits},
        [lp = logits.get(), targets, weights, lse = std::move(lse), rows, cols](Node& self) {
            if (!lp->requires_grad) return;
            const double g0 = self.grad[0];
            Tensor& gl = lp->grad_buf();
            for (int64_t r = 0; r < rows; ++r) {
                const double w = weights[static_cast<size_t>(r)];
                if (w == 0.0) continue;
                const double* row = lp->value.data() + r * cols;
                const double l = lse[static_cast<size_t>(r)];
                for (int64_t c = 0; c < cols; ++c) {
                    double p = std::exp(row[c] - l);
                    gl[r * cols + c] += g0 * w * p;
                }
                gl[r * cols + targets[static_cast<size_t>(r)]] -= g0 * w;
            }
        });
}

Var dropout(const Var& x, double p, SplitRng& rng, bool train) {
    if (!train || p == 0.0) {
        return x;
    }
    if (p < 0.0 || p > 1.0) {
        throw ConfigError("dropout probability must lie in [0, 1]");
    }
    Tensor mask(x->value.shape());
    if (p < 1.0) {
        const double keep_scale = 1.0 / (1.0 - p);
        for (int64_t i = 0; i < mask.numel(); ++i) {
            mask[i] = rng.uniform() < p ? 0.0 : keep_scale;
        }
    }
    Tensor out = x->value;
    for (int64_t i = 0; i < out.numel(); ++i) {
        out[i] *= mask[i];
    }
    return tape_of(x)->make("dropout", std::move(out), {x},
                            [xp = x.get(), mask = std::move(mask)](Node& self) {
                                if (!xp->requires_grad) return;
                                Tensor& gx = xp->grad_buf();
                                const double* g = self.grad.data();
                                for (int64_t i = 0; i < self.grad.numel(); ++i) {
                                    gx[i] += g[i] * mask[i];
                                }
                            });
}

Var embedding(const Var& table, const std::vector<int>& ids) {
    if (table->value.rank() != 2) {
        throw ShapeError("embedding table must be 2-D, got " + table->value.shape_str());
    }
    const int64_t vocab = table->value.rows();
    const int64_t dim = table->value.cols();
    const int64_t rows = static_cast<int64_t>(ids.size());
    Tensor out({rows, dim});
    for (int64_t r = 0; r < rows; ++r) {
        const int id = ids[static_cast<size_t>(r)];
        if (id < 0 || id >= vocab) {
            throw TokenError("embedding id " + std::to_string(id) +
                             " outside vocabulary of size " + std::to_string(vocab));
        }
        std::copy_n(table->value.data() + id * dim, dim, out.data() + r * dim);
    }
    return tape_of(table)->make("embedding", std::move(out), {table},
                                [tp = table.get(), ids, rows, dim](Node& self) {
                                    if (!tp->requires_grad) return;
                                    Tensor& gt = tp->grad_buf();
                                    const double* g = self.grad.data();
                                    for (int64_t r = 0; r < rows; ++r) {
                                        double* dst = gt.data() + ids[static_cast<size_t>(r)] * dim;
                                        for (int64_t c = 0; c < dim; ++c) {
                                            dst[c] += g[r * dim + c];
                                        }
                                    }
                                });
}

Var stack_steps(const std::vector<Var>& steps) {
    if (steps.empty()) {
        throw ShapeError("stack_steps requires at least one step");
    }
    const int64_t batch = steps[0]->value.rows();
    const int64_t dim = steps[0]->value.cols();
    const int64_t count = static_cast<int64_t>(steps.size());
    Tensor out({batch, count, dim});
    std::vector<Var> parents;
    parents.reserve(steps.size());
    for (int64_t s = 0; s < count; ++s) {
        const Tensor& v = steps[static_cast<size_t>(s)]->value;
        if (v.rank() != 2 || v.rows() != batch || v.cols() != dim) {
            throw ShapeError("stack_steps shape mismatch at step " + std::to_string(s) + ": " +
                             v.shape_str());
        }
        for (int64_t b = 0; b < batch; ++b) {
            std::copy_n(v.data() + b * dim, dim, out.data() + (b * count + s) * dim);
        }
        parents.push_back(steps[static_cast<size_t>(s)]);
    }
    return tape_of(steps[0])->make(
        "stack_steps", std::move(out), std::move(parents),
        [batch, count, dim](Node& self) {
            const double* g = self.grad.data();
            for (int64_t s = 0; s < count; ++s) {
                Node* step = self.parents[static_cast<size_t>(s)].get();
                if (!step->requires_grad) continue;
                Tensor& gs = step->grad_buf();
                for (int64_t b = 0; b < batch; ++b) {
                    const double* src = g + (b * count + s) * dim;
                    double* dst = gs.data() + b * dim;
                    for (int64_t c = 0; c < dim; ++c) {
                        dst[c] += src[c];
                    }
                }
            }
        });
}

Var attn_scores(const Var& u, const Var& seq) {
    check_same_tape(u, seq);
    if (u->value.rank() != 2 || seq->value.rank() != 3 || u->value.rows() != seq->value.dim(0) ||
        u->value.cols() != seq->value.dim(2)) {
        throw ShapeError("attn_scores shape mismatch: " + shape_pair_str(u->value, seq->value));
    }
    const int64_t batch = seq->value.dim(0);
    const int64_t count = seq->value.dim(1);
    const int64_t dim = seq->value.dim(2);
    Tensor out({batch, count});
    for (int64_t b = 0; b < batch; ++b) {
        const double* ub = u->value.data() + b * dim;
        for (int64_t s = 0; s < count; ++s) {
            const double* hs = seq->value.data() + (b * count + s) * dim;
            double acc = 0.0;
            for (int64_t d = 0; d < dim; ++d) {
                acc += ub[d] * hs[d];
            }
            out[b * count + s] = acc;
        }
    }
    return tape_of(u)->make(
        "attn_scores", std::move(out), {u, seq},
        [up = u.get(), sp = seq.get(), batch, count, dim](Node& self) {
            const double* g = self.grad.data();
            if (up->requires_grad) {
                Tensor& gu = up->grad_buf();
                for (int64_t b = 0; b < batch; ++b) {
                    for (int64_t s = 0; s < count; ++s) {
                        const double gv = g[b * count + s];
                        const double* hs = sp->value.data() + (b * count + s) * dim;
                        double* dst = gu.data() + b * dim;
                        for (int64_t d = 0; d < dim; ++d) {
                            dst[d] += gv * hs[d];
                        }
                    }
                }
            }
            if (sp->requires_grad) {
                Tensor& gs = sp->grad_buf();
                for (int64_t b = 0; b < batch; ++b) {
                    const double* ub = up->value.data() + b * dim;
                    for (int64_t s = 0; s < count; ++s) {
                        const double gv = g[b * count + s];
                        double* dst = gs.data() + (b * count + s) * dim;
                        for (int64_t d = 0; d < dim; ++d) {
                            dst[d] += gv * ub[d];
                        }
                    }
                }
            }
        });
}

Var attn_context(const Var& w, const Var& seq) {
    check_same_tape(w, seq);
    if (w->value.rank() != 2 || seq->value.rank() != 3 || w->value.rows() != seq->value.dim(0) ||
        w->value.cols() != seq->value.dim(1)) {
        throw ShapeError("attn_context shape mismatch: " + shape_pair_str(w->value, seq->value));
    }
    const int64_t batch = seq->value.dim(0);
    const int64_t count = seq->value.dim(1);
    const int64_t dim = seq->value.dim(2);
    Tensor out({batch, dim});
    for (int64_t b = 0; b < batch; ++b) {
        double* ob = out.data() + b * dim;
        for (int64_t s = 0; s < count; ++s) {
            const double wv = w->value[b * count + s];
            const double* hs = seq->value.data() + (b * count + s) * dim;
            for (int64_t d = 0; d < dim; ++d) {
                ob[d] += wv * hs[d];
            }
        }
    }
    return tape_of(w)->make(
        "attn_context", std::move(out), {w, seq},
        [wp = w.get(), sp = seq.get(), batch, count, dim](Node& self) {
            const double* g = self.grad.data();
            if (wp->requires_grad) {
                Tensor& gw = wp->grad_buf();
                for (int64_t b = 0; b < batch; ++b) {
                    const double* gb = g + b * dim;
                    for (int64_t s = 0; s < count; ++s) {
                        const double* hs = sp->value.data() + (b * count + s) * dim;
                        double acc = 0.0;
                        for (int64_t d = 0; d < dim; ++d) {
                            acc += gb[d] * hs[d];
                        }
                        gw[b * count + s] += acc;
                    }
                }
            }
            if (sp->requires_grad) {
                Tensor& gs = sp->grad_buf();
                for (int64_t b = 0; b < batch; ++b) {
                    const double* gb = g + b * dim;
                    for (int64_t s = 0; s < count; ++s) {
                        const double wv = wp->value[b * count + s];
                        double* dst = gs.data() + (b * count + s) * dim;
                        for (int64_t d = 0; d < dim; ++d) {
                            dst[d] += wv * gb[d];
                        }
                    }
                }
            }
        });
}

double grad_check(const std::function<Var(Tape&)>& build_loss,
                  const std::vector<Parameter*>& params, double eps) {
    for (Parameter* p : params) {
        p->zero_grad();
    }
    std::vector<Tensor> analytic;
    {
        Tape tape;
        Var loss = build_loss(tape);
        if (!std::isfinite(loss->value[0])) {
            throw NumericError("grad_check loss is non-finite");
        }
        tape.backward(loss);
    }
    analytic.reserve(params.size());
    for (Parameter* p : params) {
        analytic.push_back(p->grad);
    }

    auto eval_loss = [&]() {
        Tape tape;
        return build_loss(tape)->value[0];
    };

    double max_rel = 0.0;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& v = params[pi]->value;
        for (int64_t i = 0; i < v.numel(); ++i) {
            const double orig = v[i];
            v[i] = orig + eps;
            const double up = eval_loss();
            v[i] = orig - eps;
            const double down = eval_loss();
            v[i] = orig;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[pi][i];
            const double rel = std::abs(a - numeric) /
                               std::max({std::abs(a), std::abs(numeric), 1e-8});
            max_rel = std::max(max_rel, rel);
        }
    }
    for (Parameter* p : params) {
        p->zero_grad();
    }
    return max_rel;
}

}  // namespace symrewrite
