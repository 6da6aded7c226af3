#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace symrewrite {

// FNV-1a, 64-bit. Used to fingerprint files so mismatched artifacts are
// rejected early; not a cryptographic hash.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ULL) {
    uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

// Hex FNV-1a fingerprint of a whole file. Throws ParseError if unreadable.
std::string file_fingerprint(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace symrewrite
