#include "symrewrite/hashing.hpp"

#include <fstream>
#include <sstream>

#include "symrewrite/errors.hpp"

namespace symrewrite {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open file for writing: " + path);
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw ParseError("write failed: " + path);
    }
}

std::string file_fingerprint(const std::string& path) {
    return hex64(fnv1a64(read_file(path)));
}

}  // namespace symrewrite
