#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "symrewrite/autodiff.hpp"
#include "symrewrite/errors.hpp"
#include "symrewrite/rng.hpp"
#include "symrewrite/tensor.hpp"

using namespace symrewrite;

namespace {

Tensor random_tensor(std::vector<int64_t> shape, SplitRng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) {
        t[i] = rng.uniform(lo, hi);
    }
    return t;
}

Parameter random_param(const std::string& name, std::vector<int64_t> shape, uint64_t seed) {
    SplitRng rng(seed);
    return Parameter(name, random_tensor(std::move(shape), rng));
}

}  // namespace

TEST_CASE("rng determinism and splits") {
    SplitRng a(1234);
    SplitRng b(1234);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }

    // split depends only on key and label, not on parent's position
    SplitRng parent1(99);
    SplitRng parent2(99);
    (void)parent2.next_u64();
    (void)parent2.next_u64();
    SplitRng c1 = parent1.split("data");
    SplitRng c2 = parent2.split("data");
    CHECK(c1.next_u64() == c2.next_u64());

    SplitRng d1 = parent1.split("data");
    SplitRng d2 = parent1.split("init");
    CHECK(d1.next_u64() != d2.next_u64());
    SplitRng e1 = parent1.split(uint64_t{3});
    SplitRng e2 = parent1.split(uint64_t{4});
    CHECK(e1.next_u64() != e2.next_u64());
}

TEST_CASE("rng uniform statistics") {
    SplitRng rng(7);
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.uniform(-0.1, 0.1);
        CHECK(v >= -0.1);
        CHECK(v < 0.1);
        sum += v;
    }
    const double mean = sum / n;
    // sd of U(-0.1, 0.1) is 0.2/sqrt(12); mean of 1e6 draws has sd ~5.77e-5
    CHECK(std::abs(mean) < 3.0 * 0.2 / std::sqrt(12.0) / std::sqrt(double(n)));
}

TEST_CASE("rng next_below is in range and roughly uniform") {
    SplitRng rng(21);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const uint64_t v = rng.next_below(7);
        REQUIRE(v < 7);
        counts[static_cast<size_t>(v)]++;
    }
    for (int c : counts) {
        CHECK(std::abs(c - n / 7) < 5 * std::sqrt(double(n / 7)));
    }
}

TEST_CASE("shuffle with a fixed seed is a fixed permutation") {
    std::vector<int> v1(20), v2(20);
    std::iota(v1.begin(), v1.end(), 0);
    std::iota(v2.begin(), v2.end(), 0);
    SplitRng r1(5);
    SplitRng r2(5);
    r1.shuffle(v1);
    r2.shuffle(v2);
    CHECK(v1 == v2);
    std::vector<int> sorted = v1;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 20; ++i) {
        CHECK(sorted[static_cast<size_t>(i)] == i);
    }
}

TEST_CASE("gemm shape errors name both shapes") {
    Tensor a({2, 3});
    Tensor b({4, 5});
    Tensor out;
    CHECK_THROWS_WITH_AS(gemm(a, false, b, false, out, false),
                         doctest::Contains("[2x3] vs [4x5]"), ShapeError);
}

TEST_CASE("softmax rows sum to one") {
    Tape tape;
    SplitRng rng(3);
    Var x = tape.constant(random_tensor({5, 9}, rng, -4.0, 4.0));
    Var y = softmax_rows(x);
    for (int64_t r = 0; r < 5; ++r) {
        double sum = 0.0;
        for (int64_t c = 0; c < 9; ++c) {
            const double v = y->value.at(r, c);
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("cross entropy of uniform logits is ln V") {
    Tape tape;
    const int v = 17;
    Var logits = tape.constant(Tensor({3, v}));  // all zero = uniform
    Var loss = cross_entropy_sum(logits, {0, 5, 16}, {1.0, 1.0, 1.0});
    CHECK(loss->value[0] == doctest::Approx(3.0 * std::log(double(v))).epsilon(1e-12));
}

TEST_CASE("dropout") {
    SplitRng rng(11);
    Tape tape;
    Tensor xv = random_tensor({4, 8}, rng);
    Var x = tape.constant(xv);

    SUBCASE("p=0 is the identity") {
        SplitRng drop(1);
        Var y = dropout(x, 0.0, drop, true);
        CHECK(y.get() == x.get());
    }
    SUBCASE("eval mode is the identity") {
        SplitRng drop(1);
        Var y = dropout(x, 0.5, drop, false);
        CHECK(y.get() == x.get());
    }
    SUBCASE("p=1 zeroes everything") {
        SplitRng drop(1);
        Var y = dropout(x, 1.0, drop, true);
        for (int64_t i = 0; i < y->value.numel(); ++i) {
            CHECK(y->value[i] == 0.0);
        }
    }
    SUBCASE("kept entries are scaled by 1/(1-p)") {
        SplitRng drop(1);
        const double p = 0.25;
        Var y = dropout(x, p, drop, true);
        int kept = 0;
        for (int64_t i = 0; i < y->value.numel(); ++i) {
            if (y->value[i] != 0.0) {
                CHECK(y->value[i] == doctest::Approx(xv[i] / (1.0 - p)));
                ++kept;
            }
        }
        CHECK(kept > 0);
    }
}

TEST_CASE("non-finite op results are rejected") {
    Tape tape;
    Var big = tape.constant(Tensor::full({2, 2}, 1e308));
    CHECK_THROWS_AS((void)add(big, big), NumericError);
}

TEST_CASE("per-op gradients match finite differences below 1e-6") {
    auto check = [](const char* what, const std::function<Var(Tape&)>& loss,
                    std::vector<Parameter*> ps) {
        const double err = grad_check(loss, ps);
        INFO(what);
        CHECK(err < 1e-6);
    };

    SUBCASE("matmul, all four transpose modes") {
        Parameter a = random_param("a", {3, 4}, 1);
        Parameter b = random_param("b", {4, 5}, 2);
        check("nn", [&](Tape& t) { return sum_all(matmul(t.leaf(a), t.leaf(b))); }, {&a, &b});
        Parameter bt = random_param("bt", {5, 4}, 3);
        check("nt", [&](Tape& t) { return sum_all(matmul(t.leaf(a), t.leaf(bt), false, true)); },
              {&a, &bt});
        Parameter at = random_param("at", {4, 3}, 4);
        check("tn", [&](Tape& t) { return sum_all(matmul(t.leaf(at), t.leaf(b), true, false)); },
              {&at, &b});
        check("tt", [&](Tape& t) { return sum_all(matmul(t.leaf(at), t.leaf(bt), true, true)); },
              {&at, &bt});
    }

    SUBCASE("elementwise and bias ops") {
        Parameter a = random_param("a", {4, 6}, 5);
        Parameter b = random_param("b", {4, 6}, 6);
        Parameter bias = random_param("bias", {6}, 7);
        check("add", [&](Tape& t) { return sum_all(add(t.leaf(a), t.leaf(b))); }, {&a, &b});
        check("mul", [&](Tape& t) { return sum_all(mul(t.leaf(a), t.leaf(b))); }, {&a, &b});
        check("add_bias", [&](Tape& t) { return sum_all(add_bias(t.leaf(a), t.leaf(bias))); },
              {&a, &bias});
        check("sigmoid", [&](Tape& t) { return sum_all(sigmoid(t.leaf(a))); }, {&a});
        check("tanh", [&](Tape& t) { return sum_all(tanh(t.leaf(a))); }, {&a});
        check("scale", [&](Tape& t) { return scale(sum_all(t.leaf(a)), 0.37); }, {&a});
    }

    SUBCASE("shape ops") {
        Parameter a = random_param("a", {3, 4}, 8);
        Parameter b = random_param("b", {3, 2}, 9);
        check("concat", [&](Tape& t) {
            Var y = concat_cols(t.leaf(a), t.leaf(b));
            return sum_all(mul(y, y));
        }, {&a, &b});
        check("slice", [&](Tape& t) {
            Var y = slice_cols(t.leaf(a), 1, 2);
            return sum_all(mul(y, y));
        }, {&a});
    }

    SUBCASE("softmax and cross entropy") {
        Parameter a = random_param("a", {3, 5}, 10);
        Parameter w = random_param("w", {3, 5}, 11);
        check("softmax", [&](Tape& t) {
            return sum_all(mul(softmax_rows(t.leaf(a)), t.leaf(w)));
        }, {&a, &w});
        check("cross_entropy", [&](Tape& t) {
            return cross_entropy_sum(t.leaf(a), {1, 0, 4}, {1.0, 0.5, 2.0});
        }, {&a});
    }

    SUBCASE("embedding") {
        Parameter table = random_param("table", {6, 3}, 12);
        check("embedding", [&](Tape& t) {
            Var y = embedding(t.leaf(table), {0, 2, 2, 5});
            return sum_all(mul(y, y));
        }, {&table});
    }

    SUBCASE("attention ops") {
        Parameter u = random_param("u", {2, 3}, 13);
        Parameter s0 = random_param("s0", {2, 3}, 14);
        Parameter s1 = random_param("s1", {2, 3}, 15);
        Parameter s2 = random_param("s2", {2, 3}, 16);
        Parameter w = random_param("w", {2, 3}, 17);
        check("attn_scores+context", [&](Tape& t) {
            Var seq = stack_steps({t.leaf(s0), t.leaf(s1), t.leaf(s2)});
            Var scores = attn_scores(t.leaf(u), seq);
            Var ctx = attn_context(softmax_rows(scores), seq);
            return sum_all(mul(ctx, t.leaf(w)));
        }, {&u, &s0, &s1, &s2, &w});
    }

    SUBCASE("dropout with a fixed mask") {
        Parameter a = random_param("a", {5, 5}, 18);
        check("dropout", [&](Tape& t) {
            SplitRng drop(99);  // rebuilt per evaluation, so the mask is fixed
            Var y = dropout(t.leaf(a), 0.4, drop, true);
            return sum_all(mul(y, y));
        }, {&a});
    }
}

TEST_CASE("grad_check closed forms") {
    SUBCASE("linear function is exact") {
        Parameter w = random_param("w", {1, 8}, 20);
        Parameter x = random_param("x", {1, 8}, 21);
        const double err =
            grad_check([&](Tape& t) { return sum_all(mul(t.leaf(w), t.leaf(x))); }, {&w, &x});
        CHECK(err < 1e-9);
    }
    SUBCASE("constant function has zero gradient everywhere") {
        Parameter w = random_param("w", {2, 2}, 22);
        const double err = grad_check(
            [&](Tape& t) {
                (void)t.leaf(w);
                return t.constant(Tensor::scalar(3.5));
            },
            {&w});
        CHECK(err == 0.0);
    }
}

TEST_CASE("backward accumulates through reused nodes") {
    Parameter a = random_param("a", {2, 2}, 30);
    Tape tape;
    Var x = tape.leaf(a);
    Var y = add(x, x);  // dy/dx = 2
    tape.backward(sum_all(y));
    for (int64_t i = 0; i < a.grad.numel(); ++i) {
        CHECK(a.grad[i] == doctest::Approx(2.0));
    }
}
