#include "symrewrite/grammar.hpp"

#include <sstream>

#include "symrewrite/errors.hpp"
#include "symrewrite/hashing.hpp"

namespace symrewrite {

std::string to_string(BlockPolicy p) {
    return p == BlockPolicy::DistinctWithinBlock ? "distinct" : "replace";
}

BlockPolicy block_policy_from_string(const std::string& s) {
    if (s == "distinct") return BlockPolicy::DistinctWithinBlock;
    if (s == "replace") return BlockPolicy::WithReplacement;
    throw ConfigError("unknown block policy '" + s + "' (expected distinct|replace)");
}

Grammar::Grammar(int num_inputs, int alphabet_size, int k, BlockPolicy policy)
    : num_inputs_(num_inputs), alphabet_size_(alphabet_size), k_(k), policy_(policy) {
    if (num_inputs < 1) {
        throw ConfigError("grammar needs at least one input symbol");
    }
    if (alphabet_size < 1) {
        throw ConfigError("output alphabets need at least one token");
    }
    if (k < 1) {
        throw ConfigError("block length k must be at least 1");
    }
    if (policy == BlockPolicy::DistinctWithinBlock && k > alphabet_size) {
        throw ConfigError("distinct blocks of length " + std::to_string(k) +
                          " are impossible with alphabets of size " +
                          std::to_string(alphabet_size));
    }
}

std::string Grammar::token_name(int token) const {
    if (is_input_token(token)) {
        return "x" + std::to_string(token);
    }
    if (is_output_token(token)) {
        const int rel = token - num_inputs_;
        return "y" + std::to_string(rel / alphabet_size_) + "_" +
               std::to_string(rel % alphabet_size_);
    }
    throw TokenError("token id " + std::to_string(token) + " is not part of this grammar");
}

int Grammar::token_id(const std::string& name) const {
    auto parse_int = [&](const std::string& s) {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
            throw TokenError("malformed token name '" + name + "'");
        }
        return std::stoi(s);
    };
    if (name.size() >= 2 && name[0] == 'x') {
        const int i = parse_int(name.substr(1));
        if (i >= num_inputs_) {
            throw TokenError("input token '" + name + "' outside grammar with |X|=" +
                             std::to_string(num_inputs_));
        }
        return i;
    }
    if (name.size() >= 4 && name[0] == 'y') {
        const auto sep = name.find('_');
        if (sep != std::string::npos) {
            const int i = parse_int(name.substr(1, sep - 1));
            const int j = parse_int(name.substr(sep + 1));
            if (i >= num_inputs_ || j >= alphabet_size_) {
                throw TokenError("output token '" + name + "' outside grammar");
            }
            return output_token(i, j);
        }
    }
    throw TokenError("malformed token name '" + name + "'");
}

std::vector<int> Grammar::generate_output(const std::vector<int>& input, SplitRng& rng) const {
    std::vector<int> out;
    out.reserve(input.size() * static_cast<size_t>(k_));
    std::vector<int> pool(static_cast<size_t>(alphabet_size_));
    for (int symbol : input) {
        if (!is_input_token(symbol)) {
            throw TokenError("cannot rewrite unknown input token id " + std::to_string(symbol));
        }
        if (policy_ == BlockPolicy::DistinctWithinBlock) {
            for (int j = 0; j < alphabet_size_; ++j) {
                pool[static_cast<size_t>(j)] = j;
            }
            // partial Fisher-Yates: first k entries are a uniform ordered sample
            for (int j = 0; j < k_; ++j) {
                const auto pick =
                    static_cast<size_t>(j) +
                    static_cast<size_t>(rng.next_below(static_cast<uint64_t>(alphabet_size_ - j)));
                std::swap(pool[static_cast<size_t>(j)], pool[pick]);
                out.push_back(output_token(symbol, pool[static_cast<size_t>(j)]));
            }
        } else {
            for (int j = 0; j < k_; ++j) {
                const int idx = static_cast<int>(rng.next_below(static_cast<uint64_t>(alphabet_size_)));
                out.push_back(output_token(symbol, idx));
            }
        }
    }
    return out;
}

bool Grammar::validate(const std::vector<int>& input, const std::vector<int>& output) const {
    if (output.size() != input.size() * static_cast<size_t>(k_)) {
        return false;
    }
    for (size_t i = 0; i < input.size(); ++i) {
        const int symbol = input[i];
        if (!is_input_token(symbol)) {
            return false;
        }
        const int lo = output_token(symbol, 0);
        const int hi = lo + alphabet_size_;
        for (int a = 0; a < k_; ++a) {
            const int tok = output[i * static_cast<size_t>(k_) + static_cast<size_t>(a)];
            if (tok < lo || tok >= hi) {
                return false;
            }
            if (policy_ == BlockPolicy::DistinctWithinBlock) {
                for (int b = 0; b < a; ++b) {
                    if (output[i * static_cast<size_t>(k_) + static_cast<size_t>(b)] == tok) {
                        return false;
                    }
                }
            }
        }
    }
    return true;
}

BigUint Grammar::count_valid_outputs(const std::vector<int>& input) const {
    BigUint count(1);
    for (int symbol : input) {
        if (!is_input_token(symbol)) {
            throw TokenError("cannot count outputs of unknown input token id " +
                             std::to_string(symbol));
        }
        for (int j = 0; j < k_; ++j) {
            const int factor =
                policy_ == BlockPolicy::DistinctWithinBlock ? alphabet_size_ - j : alphabet_size_;
            count.mul(static_cast<uint64_t>(factor));
        }
    }
    return count;
}

std::string Grammar::to_text() const {
    std::ostringstream out;
    out << "grammar v1 |X|=" << num_inputs_ << " |Y|=" << alphabet_size_ << " k=" << k_
        << " policy=" << to_string(policy_) << "\n";
    for (int i = 0; i < num_inputs_; ++i) {
        out << "x" << i << ":";
        for (int j = 0; j < alphabet_size_; ++j) {
            out << " y" << i << "_" << j;
        }
        out << "\n";
    }
    return out.str();
}

Grammar Grammar::from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty grammar file", 1);
    }
    int n = 0, m = 0, k = 0;
    char policy_buf[16] = {0};
    if (std::sscanf(line.c_str(), "grammar v1 |X|=%d |Y|=%d k=%d policy=%15s", &n, &m, &k,
                    policy_buf) != 4) {
        throw ParseError("malformed grammar header: " + line, 1);
    }
    Grammar g(n, m, k, block_policy_from_string(policy_buf));

    // Body lines must match the canonical layout exactly.
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line)) {
            throw ParseError("grammar file truncated: expected line for x" + std::to_string(i),
                             i + 2);
        }
        std::ostringstream expect;
        expect << "x" << i << ":";
        for (int j = 0; j < m; ++j) {
            expect << " y" << i << "_" << j;
        }
        if (line != expect.str()) {
            throw ParseError("grammar line does not match canonical token layout", i + 2);
        }
    }
    return g;
}

void Grammar::save(const std::string& path) const { write_file(path, to_text()); }

Grammar Grammar::load(const std::string& path) {
    try {
        return from_text(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()) + " [" + path + "]");
    }
}

}  // namespace symrewrite
