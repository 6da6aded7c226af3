#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symrewrite/errors.hpp"

namespace symrewrite {

// Unsigned big integer supporting exactly what exact output counting needs:
// start from a small value, multiply by small factors, compare, print.
// Limbs are base 1e9, least significant first.
class BigUint {
public:
    BigUint() : limbs_{0} {}
    explicit BigUint(uint64_t v) {
        do {
            limbs_.push_back(static_cast<uint32_t>(v % kBase));
            v /= kBase;
        } while (v != 0);
    }

    void mul(uint64_t factor) {
        if (factor >= (1ULL << 32)) {
            throw ConfigError("BigUint::mul factor too large");
        }
        if (factor == 0) {
            limbs_.assign(1, 0);
            return;
        }
        uint64_t carry = 0;
        for (auto& limb : limbs_) {
            uint64_t t = static_cast<uint64_t>(limb) * factor + carry;
            limb = static_cast<uint32_t>(t % kBase);
            carry = t / kBase;
        }
        while (carry != 0) {
            limbs_.push_back(static_cast<uint32_t>(carry % kBase));
            carry /= kBase;
        }
    }

    bool fits_u64() const {
        // 3 limbs max 999999999'999999999'999999999 > 2^64, so check explicitly.
        uint64_t v = 0;
        return to_u64_checked(v);
    }

    uint64_t as_u64() const {
        uint64_t v = 0;
        if (!to_u64_checked(v)) {
            throw ConfigError("BigUint value exceeds 64 bits");
        }
        return v;
    }

    std::string to_string() const {
        std::string out = std::to_string(limbs_.back());
        for (size_t i = limbs_.size() - 1; i-- > 0;) {
            std::string part = std::to_string(limbs_[i]);
            out += std::string(9 - part.size(), '0') + part;
        }
        return out;
    }

    friend bool operator==(const BigUint& a, const BigUint& b) { return a.limbs_ == b.limbs_; }
    friend bool operator==(const BigUint& a, uint64_t b) { return a == BigUint(b); }

private:
    static constexpr uint64_t kBase = 1000000000ULL;

    bool to_u64_checked(uint64_t& out) const {
        uint64_t v = 0;
        for (size_t i = limbs_.size(); i-- > 0;) {
            if (v > (UINT64_MAX - limbs_[i]) / kBase) {
                return false;
            }
            v = v * kBase + limbs_[i];
        }
        out = v;
        return true;
    }

    std::vector<uint32_t> limbs_;
};

}  // namespace symrewrite
