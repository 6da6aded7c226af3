#include "symrewrite/tensor.hpp"

#include <cmath>
#include <numeric>

#include "symrewrite/errors.hpp"

namespace symrewrite {

namespace {

int64_t shape_numel(const std::vector<int64_t>& shape) {
    if (shape.empty()) {
        throw ShapeError("tensor shape must have at least one dimension");
    }
    int64_t n = 1;
    for (int64_t d : shape) {
        if (d < 0) {
            throw ShapeError("negative dimension in tensor shape");
        }
        n *= d;
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> shape)
    : shape_(std::move(shape)), data_(static_cast<size_t>(shape_numel(shape_)), 0.0) {}

Tensor::Tensor(std::vector<int64_t> shape, std::vector<double> values) : shape_(std::move(shape)) {
    if (shape_numel(shape_) != static_cast<int64_t>(values.size())) {
        throw ShapeError("value count does not match shape " + shape_str());
    }
    data_ = std::move(values);
}

Tensor Tensor::full(std::vector<int64_t> shape, double v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

std::string Tensor::shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape_[i]);
    }
    return s + "]";
}

std::string shape_pair_str(const Tensor& a, const Tensor& b) {
    return a.shape_str() + " vs " + b.shape_str();
}

void gemm(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& out,
          bool accumulate) {
    if (a.rank() != 2 || b.rank() != 2) {
        throw ShapeError("gemm expects 2-D tensors, got " + shape_pair_str(a, b));
    }
    const int64_t m = trans_a ? a.cols() : a.rows();
    const int64_t k = trans_a ? a.rows() : a.cols();
    const int64_t kb = trans_b ? b.cols() : b.rows();
    const int64_t n = trans_b ? b.rows() : b.cols();
    if (k != kb) {
        throw ShapeError("gemm inner dimensions disagree: " + shape_pair_str(a, b));
    }
    if (out.rank() != 2 || out.rows() != m || out.cols() != n) {
        out = Tensor({m, n});
    } else if (!accumulate) {
        out.fill(0.0);
    }

    const double* __restrict__ A = a.data();
    const double* __restrict__ B = b.data();
    double* __restrict__ C = out.data();

    if (!trans_a && !trans_b) {
        // C[i,j] += A[i,p] * B[p,j]; p middle keeps B and C rows contiguous.
        for (int64_t i = 0; i < m; ++i) {
            double* __restrict__ c_row = C + i * n;
            const double* __restrict__ a_row = A + i * k;
            for (int64_t p = 0; p < k; ++p) {
                const double av = a_row[p];
                const double* __restrict__ b_row = B + p * n;
                for (int64_t j = 0; j < n; ++j) {
                    c_row[j] += av * b_row[j];
                }
            }
        }
    } else if (!trans_a && trans_b) {
        // C[i,j] += dot(A row i, B row j); both rows contiguous. Two lanes
        // per output keep the FMA pipes busy without changing the per-value
        // reduction order across runs.
        for (int64_t i = 0; i < m; ++i) {
            const double* __restrict__ a_row = A + i * k;
            double* __restrict__ c_row = C + i * n;
            int64_t j = 0;
            for (; j + 1 < n; j += 2) {
                const double* __restrict__ b0 = B + j * k;
                const double* __restrict__ b1 = B + (j + 1) * k;
                double acc0 = 0.0, acc1 = 0.0;
                for (int64_t p = 0; p < k; ++p) {
                    acc0 += a_row[p] * b0[p];
                    acc1 += a_row[p] * b1[p];
                }
                c_row[j] += acc0;
                c_row[j + 1] += acc1;
            }
            for (; j < n; ++j) {
                const double* __restrict__ b_row = B + j * k;
                double acc = 0.0;
                for (int64_t p = 0; p < k; ++p) {
                    acc += a_row[p] * b_row[p];
                }
                c_row[j] += acc;
            }
        }
    } else if (trans_a && !trans_b) {
        // C[i,j] += A[p,i] * B[p,j]
        for (int64_t p = 0; p < k; ++p) {
            const double* __restrict__ a_row = A + p * m;
            const double* __restrict__ b_row = B + p * n;
            for (int64_t i = 0; i < m; ++i) {
                const double av = a_row[i];
                double* __restrict__ c_row = C + i * n;
                for (int64_t j = 0; j < n; ++j) {
                    c_row[j] += av * b_row[j];
                }
            }
        }
    } else {
        // C[i,j] += A[p,i] * B[j,p]
        for (int64_t i = 0; i < m; ++i) {
            double* __restrict__ c_row = C + i * n;
            for (int64_t j = 0; j < n; ++j) {
                const double* __restrict__ b_row = B + j * k;
                double acc = 0.0;
                for (int64_t p = 0; p < k; ++p) {
                    acc += A[p * m + i] * b_row[p];
                }
                c_row[j] += acc;
            }
        }
    }
}

}  // namespace symrewrite
