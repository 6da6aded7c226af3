#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace symrewrite {

// Deterministic counter-based stream: pure 64-bit integer arithmetic, so a
// seed produces the same draws on every platform. Streams are split by label
// (or index) into statistically independent children; a child depends only on
// the parent's key and the label, never on how far the parent has advanced.
class SplitRng {
public:
    explicit SplitRng(uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)), counter_(0) {}

    SplitRng split(std::string_view label) const {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : label) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return SplitRng(mix64(key_ ^ mix64(h ^ 0x9e3779b97f4a7c15ULL)), 0);
    }

    SplitRng split(uint64_t index) const {
        return SplitRng(mix64(key_ ^ mix64(index + 0xbf58476d1ce4e5b9ULL)), 0);
    }

    uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    // Uniform on [a, b). 53-bit mantissa construction.
    double uniform(double a = 0.0, double b = 1.0) {
        double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return a + (b - a) * u;
    }

    // Unbiased integer in [0, n) by rejection.
    uint64_t next_below(uint64_t n) {
        uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        uint64_t r;
        do {
            r = next_u64();
        } while (r < threshold);
        return r % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    SplitRng(uint64_t key, uint64_t counter) : key_(key), counter_(counter) {}

    // splitmix64 finalizer
    static uint64_t mix64(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t key_;
    uint64_t counter_;
};

}  // namespace symrewrite
