#include "symrewrite/datagen.hpp"

#include <algorithm>
#include <sstream>

#include "symrewrite/errors.hpp"
#include "symrewrite/hashing.hpp"

namespace symrewrite {

const std::vector<std::string> kSplitNames = {
    "train",       "val_standard", "val_tuning", "test_standard",
    "test_repeat", "test_short",   "test_long",
};

std::string to_string(RepeatMode m) {
    switch (m) {
        case RepeatMode::Forbidden: return "forbidden";
        case RepeatMode::Allowed: return "allowed";
        case RepeatMode::RequiredAtLeastOne: return "required";
    }
    return "?";
}

RepeatMode repeat_mode_from_string(const std::string& s) {
    if (s == "forbidden") return RepeatMode::Forbidden;
    if (s == "allowed") return RepeatMode::Allowed;
    if (s == "required") return RepeatMode::RequiredAtLeastOne;
    throw ConfigError("unknown repeat mode '" + s + "' (expected forbidden|allowed|required)");
}

void DistributionSpec::check(const Grammar& g) const {
    if (min_len < 1 || min_len > max_len) {
        throw ConfigError("length range " + std::to_string(min_len) + "-" +
                          std::to_string(max_len) + " is invalid");
    }
    if (repeats == RepeatMode::Forbidden && max_len > g.num_inputs()) {
        throw ConfigError("cannot draw " + std::to_string(max_len) +
                          " distinct symbols from an input alphabet of size " +
                          std::to_string(g.num_inputs()));
    }
    if (repeats == RepeatMode::RequiredAtLeastOne && min_len < 2) {
        throw ConfigError("a guaranteed repeat needs inputs of length at least 2");
    }
    if (size < 0) {
        throw ConfigError("dataset size must be non-negative");
    }
}

namespace {

bool has_duplicate(const std::vector<int>& seq) {
    std::vector<int> sorted = seq;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

}  // namespace

std::vector<int> sample_input(const Grammar& g, const DistributionSpec& spec, SplitRng& rng) {
    spec.check(g);
    const int n = g.num_inputs();
    const int len =
        spec.min_len +
        static_cast<int>(rng.next_below(static_cast<uint64_t>(spec.max_len - spec.min_len + 1)));
    std::vector<int> seq(static_cast<size_t>(len));
    if (spec.repeats == RepeatMode::Forbidden) {
        std::vector<int> pool(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            pool[static_cast<size_t>(i)] = i;
        }
        for (int i = 0; i < len; ++i) {
            const auto pick = static_cast<size_t>(i) +
                              static_cast<size_t>(rng.next_below(static_cast<uint64_t>(n - i)));
            std::swap(pool[static_cast<size_t>(i)], pool[pick]);
            seq[static_cast<size_t>(i)] = pool[static_cast<size_t>(i)];
        }
        return seq;
    }
    do {
        for (int i = 0; i < len; ++i) {
            seq[static_cast<size_t>(i)] = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
        }
    } while (spec.repeats == RepeatMode::RequiredAtLeastOne && !has_duplicate(seq));
    return seq;
}

Dataset generate_dataset(const Grammar& g, const DistributionSpec& spec, SplitRng& rng) {
    spec.check(g);
    Dataset d;
    d.spec = spec;
    d.grammar_fingerprint = grammar_fingerprint(g);
    d.samples.reserve(static_cast<size_t>(spec.size));
    for (int i = 0; i < spec.size; ++i) {
        Sample s;
        s.input = sample_input(g, spec, rng);
        s.output = g.generate_output(s.input, rng);
        d.samples.push_back(std::move(s));
    }
    return d;
}

std::map<std::string, Dataset> paper_splits(const Grammar& g, SplitRng rng, int train_size) {
    if (g.num_inputs() < 15) {
        throw ConfigError("the long test split needs 15 distinct symbols; grammar has only " +
                          std::to_string(g.num_inputs()));
    }
    if (train_size < 0) {
        throw ConfigError("train size must be non-negative");
    }
    const std::map<std::string, DistributionSpec> specs = {
        {"train", {5, 10, RepeatMode::Forbidden, train_size}},
        {"val_standard", {5, 10, RepeatMode::Forbidden, 2000}},
        {"val_tuning", {3, 12, RepeatMode::Allowed, 5000}},
        {"test_standard", {5, 10, RepeatMode::Forbidden, 2000}},
        {"test_repeat", {5, 10, RepeatMode::RequiredAtLeastOne, 2000}},
        {"test_short", {1, 4, RepeatMode::Forbidden, 2000}},
        {"test_long", {11, 15, RepeatMode::Forbidden, 2000}},
    };
    std::map<std::string, Dataset> out;
    for (const auto& [name, spec] : specs) {
        SplitRng sub = rng.split(name);
        out.emplace(name, generate_dataset(g, spec, sub));
    }
    return out;
}

std::string dataset_to_text(const Grammar& g, const Dataset& d) {
    std::ostringstream out;
    out << "dataset v1 size=" << d.spec.size << " len=" << d.spec.min_len << "-" << d.spec.max_len
        << " repeats=" << to_string(d.spec.repeats) << " grammar=" << d.grammar_fingerprint
        << "\n";
    for (const Sample& s : d.samples) {
        for (size_t i = 0; i < s.input.size(); ++i) {
            if (i) out << " ";
            out << g.token_name(s.input[i]);
        }
        out << "\t";
        for (size_t i = 0; i < s.output.size(); ++i) {
            if (i) out << " ";
            out << g.token_name(s.output[i]);
        }
        out << "\n";
    }
    return out.str();
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) {
        out.push_back(tok);
    }
    return out;
}

}  // namespace

std::string grammar_fingerprint(const Grammar& g) { return hex64(fnv1a64(g.to_text())); }

Dataset dataset_from_text(const std::string& text, const Grammar& g, bool check_fingerprint) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty dataset file", 1);
    }
    Dataset d;
    int min_len = 0, max_len = 0, size = 0;
    char repeats_buf[16] = {0};
    char hash_buf[64] = {0};
    if (std::sscanf(line.c_str(), "dataset v1 size=%d len=%d-%d repeats=%15s grammar=%63s", &size,
                    &min_len, &max_len, repeats_buf, hash_buf) != 5) {
        throw ParseError("malformed dataset header: " + line, 1);
    }
    d.spec.size = size;
    d.spec.min_len = min_len;
    d.spec.max_len = max_len;
    d.spec.repeats = repeat_mode_from_string(repeats_buf);
    d.grammar_fingerprint = hash_buf;

    if (check_fingerprint && d.grammar_fingerprint != grammar_fingerprint(g)) {
        throw CompatError("dataset was generated for grammar " + d.grammar_fingerprint +
                          " but the provided grammar hashes to " + grammar_fingerprint(g));
    }

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError("sample line is missing the input/output tab separator", line_no);
        }
        Sample s;
        for (const std::string& name : split_ws(line.substr(0, tab))) {
            s.input.push_back(g.token_id(name));
        }
        for (const std::string& name : split_ws(line.substr(tab + 1))) {
            s.output.push_back(g.token_id(name));
        }
        if (s.output.size() != s.input.size() * static_cast<size_t>(g.k())) {
            throw ParseError("output length is not k times the input length", line_no);
        }
        if (!g.validate(s.input, s.output)) {
            throw ParseError("sample fails grammar validation", line_no);
        }
        const int len = static_cast<int>(s.input.size());
        if (len < d.spec.min_len || len > d.spec.max_len) {
            throw ParseError("input length outside the declared range", line_no);
        }
        d.samples.push_back(std::move(s));
    }
    if (static_cast<int>(d.samples.size()) != d.spec.size) {
        throw ParseError("dataset declares size=" + std::to_string(d.spec.size) + " but contains " +
                         std::to_string(d.samples.size()) + " samples",
                         line_no);
    }
    return d;
}

void write_dataset(const std::string& path, const Grammar& g, const Dataset& d) {
    write_file(path, dataset_to_text(g, d));
}

Dataset read_dataset(const std::string& path, const Grammar& g, bool check_fingerprint) {
    try {
        return dataset_from_text(read_file(path), g, check_fingerprint);
    } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()) + " [" + path + "]");
    }
}

}  // namespace symrewrite
