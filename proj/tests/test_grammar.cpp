#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "symrewrite/bigint.hpp"
#include "symrewrite/errors.hpp"
#include "symrewrite/grammar.hpp"

using namespace symrewrite;

namespace {

// Independent oracle: enumerate every output sequence over the full output
// vocabulary and count the ones the validator accepts.
uint64_t brute_force_count(const Grammar& g, const std::vector<int>& input,
                           std::vector<std::vector<int>>* accepted = nullptr) {
    const int lo = g.num_inputs();
    const int hi = lo + g.total_output_tokens();
    const size_t len = input.size() * static_cast<size_t>(g.k());
    std::vector<int> out(len, lo);
    uint64_t count = 0;
    while (true) {
        if (g.validate(input, out)) {
            ++count;
            if (accepted) {
                accepted->push_back(out);
            }
        }
        size_t pos = 0;
        while (pos < len && ++out[pos] == hi) {
            out[pos] = lo;
            ++pos;
        }
        if (pos == len) {
            break;
        }
    }
    if (len == 0) {
        return 1;  // the empty output, counted once
    }
    return count;
}

}  // namespace

TEST_CASE("grammar construction") {
    Grammar g(40, 16, 3, BlockPolicy::DistinctWithinBlock);
    CHECK(g.num_inputs() == 40);
    CHECK(g.total_output_tokens() == 640);
    CHECK(g.output_token(0, 0) == 40);
    CHECK(g.output_token(39, 15) == 40 + 640 - 1);

    Grammar minimal(1, 1, 1, BlockPolicy::WithReplacement);
    CHECK(minimal.total_output_tokens() == 1);
    SplitRng rng(1);
    CHECK(minimal.generate_output({0}, rng) == std::vector<int>{1});

    CHECK_THROWS_AS(Grammar(2, 3, 4, BlockPolicy::DistinctWithinBlock), ConfigError);
    CHECK_THROWS_AS(Grammar(0, 3, 1, BlockPolicy::WithReplacement), ConfigError);
    CHECK_THROWS_AS(Grammar(2, 0, 1, BlockPolicy::WithReplacement), ConfigError);
    CHECK_THROWS_AS(Grammar(2, 3, 0, BlockPolicy::WithReplacement), ConfigError);
    // with replacement there is no k <= |Y| constraint
    CHECK_NOTHROW(Grammar(2, 3, 4, BlockPolicy::WithReplacement));
}

TEST_CASE("deterministic token layout") {
    Grammar a(5, 4, 2, BlockPolicy::DistinctWithinBlock);
    Grammar b(5, 4, 2, BlockPolicy::DistinctWithinBlock);
    CHECK(a == b);
    CHECK(a.to_text() == b.to_text());
    CHECK(a.token_name(0) == "x0");
    CHECK(a.token_name(4) == "x4");
    CHECK(a.token_name(5) == "y0_0");
    CHECK(a.token_name(5 + 4 * 4 + 3) == "y4_3");
    CHECK(a.token_id("x3") == 3);
    CHECK(a.token_id("y2_1") == 5 + 2 * 4 + 1);
    CHECK_THROWS_AS((void)a.token_id("x9"), TokenError);
    CHECK_THROWS_AS((void)a.token_id("y0_7"), TokenError);
    CHECK_THROWS_AS((void)a.token_id("z1"), TokenError);
    CHECK_THROWS_AS((void)a.token_name(999), TokenError);
}

TEST_CASE("validate") {
    Grammar g(2, 3, 3, BlockPolicy::DistinctWithinBlock);
    const int a0 = g.output_token(0, 0), a1 = g.output_token(0, 1), a2 = g.output_token(0, 2);
    const int b0 = g.output_token(1, 0), b1 = g.output_token(1, 1), b2 = g.output_token(1, 2);

    CHECK(g.validate({0, 1}, {a2, a1, a0, b2, b0, b1}));
    CHECK_FALSE(g.validate({0}, {}));                          // length mismatch
    CHECK_FALSE(g.validate({0, 1}, {a0, a1, b2, a2, b0, b1})); // token from Y_B inside block 0
    CHECK_FALSE(g.validate({0}, {a0, a0, a1}));                // repeat under distinct policy
    CHECK_FALSE(g.validate({0}, {a0, a1, 999}));               // unknown token
    CHECK_FALSE(g.validate({7}, {a0, a1, a2}));                // unknown input symbol
    CHECK(g.validate({}, {}));                                 // empty rewrite

    Grammar rep(2, 3, 3, BlockPolicy::WithReplacement);
    CHECK(rep.validate({0}, {a0, a0, a1}));
}

TEST_CASE("generate_output") {
    Grammar g(3, 5, 2, BlockPolicy::DistinctWithinBlock);
    SplitRng rng(42);
    SUBCASE("empty input gives empty output") {
        CHECK(g.generate_output({}, rng).empty());
    }
    SUBCASE("unknown token is rejected") {
        CHECK_THROWS_AS((void)g.generate_output({5}, rng), TokenError);
    }
    SUBCASE("every generated output validates") {
        for (int i = 0; i < 500; ++i) {
            const std::vector<int> input = {static_cast<int>(rng.next_below(3)),
                                            static_cast<int>(rng.next_below(3))};
            CHECK(g.validate(input, g.generate_output(input, rng)));
        }
    }
}

TEST_CASE("generated blocks for one 16-token symbol are all accepted by the enumerated set") {
    // |Y|=16, k=3, one symbol, with replacement: compare generation against the
    // oracle's accepted set by membership.
    Grammar g(1, 16, 3, BlockPolicy::WithReplacement);
    CHECK(g.count_valid_outputs({0}) == uint64_t{4096});
    SplitRng rng(9);
    for (int i = 0; i < 2000; ++i) {
        CHECK(g.validate({0}, g.generate_output({0}, rng)));
    }
}

TEST_CASE("count_valid_outputs closed forms") {
    Grammar distinct(1, 16, 3, BlockPolicy::DistinctWithinBlock);
    CHECK(distinct.count_valid_outputs({0}) == uint64_t{3360});  // 16*15*14

    Grammar rep(1, 16, 3, BlockPolicy::WithReplacement);
    CHECK(rep.count_valid_outputs({0}) == uint64_t{4096});  // 16^3

    CHECK(distinct.count_valid_outputs({}) == uint64_t{1});

    CHECK_THROWS_AS((void)distinct.count_valid_outputs({3}), TokenError);

    // counts multiply across positions and exceed 64 bits without overflow
    Grammar big(40, 16, 3, BlockPolicy::DistinctWithinBlock);
    std::vector<int> input(15);
    for (int i = 0; i < 15; ++i) input[static_cast<size_t>(i)] = i;
    // 3360^15, checked against an arbitrary-precision computation
    CHECK(big.count_valid_outputs(input).to_string() ==
          "78539686037963625347971934262474571776000000000000000");
}

TEST_CASE("count matches brute-force enumeration for small grammars, both policies") {
    // |X| <= 3, |Y| <= 4, k <= 2, input length <= 2; full output-vocabulary
    // enumeration stays under 10^6 sequences.
    for (BlockPolicy policy : {BlockPolicy::DistinctWithinBlock, BlockPolicy::WithReplacement}) {
        for (int n = 1; n <= 3; ++n) {
            for (int m = 1; m <= 4; ++m) {
                for (int k = 1; k <= 2; ++k) {
                    if (policy == BlockPolicy::DistinctWithinBlock && k > m) {
                        continue;
                    }
                    Grammar g(n, m, k, policy);
                    std::vector<std::vector<int>> inputs = {{}, {0}, {n - 1}};
                    if (n >= 2) {
                        inputs.push_back({0, 1});
                        inputs.push_back({1, 1});
                    }
                    for (const auto& input : inputs) {
                        const double total =
                            std::pow(double(n * m), double(k) * double(input.size()));
                        if (total > 1e6) {
                            continue;
                        }
                        INFO("n=", n, " m=", m, " k=", k, " len=", input.size(),
                             " policy=", to_string(policy));
                        CHECK(g.count_valid_outputs(input) == brute_force_count(g, input));
                    }
                }
            }
        }
    }
}

TEST_CASE("validate accepts exactly the enumerated set") {
    Grammar g(2, 3, 2, BlockPolicy::DistinctWithinBlock);
    std::vector<std::vector<int>> accepted;
    const uint64_t count = brute_force_count(g, {0, 1}, &accepted);
    CHECK(g.count_valid_outputs({0, 1}) == count);
    CHECK(count == uint64_t{36});  // (3*2)^2
    for (const auto& out : accepted) {
        CHECK(g.validate({0, 1}, out));
    }
}

TEST_CASE("grammar file round-trips exactly") {
    Grammar g(4, 3, 2, BlockPolicy::DistinctWithinBlock);
    const std::string text = g.to_text();
    CHECK(text.rfind("grammar v1 |X|=4 |Y|=3 k=2 policy=distinct\n", 0) == 0);
    Grammar back = Grammar::from_text(text);
    CHECK(back == g);
    CHECK(back.to_text() == text);

    CHECK_THROWS_AS((void)Grammar::from_text("garbage\n"), ParseError);
    CHECK_THROWS_AS((void)Grammar::from_text("grammar v1 |X|=2 |Y|=2 k=1 policy=distinct\n"
                                             "x0: y0_0 y0_1\n"),
                    ParseError);  // truncated body
    CHECK_THROWS_AS((void)Grammar::from_text("grammar v1 |X|=1 |Y|=2 k=1 policy=distinct\n"
                                             "x0: y0_1 y0_0\n"),
                    ParseError);  // non-canonical layout
}

TEST_CASE("biguint math") {
    BigUint v(1);
    for (int i = 0; i < 20; ++i) {
        v.mul(1000);
    }
    CHECK(v.to_string() == "1" + std::string(60, '0'));
    CHECK_FALSE(v.fits_u64());
    BigUint small(123456789);
    small.mul(2);
    CHECK(small.as_u64() == 246913578);
}
