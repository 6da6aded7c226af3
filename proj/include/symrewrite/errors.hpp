#pragma once

#include <stdexcept>
#include <string>

namespace symrewrite {

// Invalid parameters or an infeasible configuration (grammar sizes,
// distribution specs, hyperparameters).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A token id outside the vocabulary it is used against.
struct TokenError : std::runtime_error {
    explicit TokenError(const std::string& what) : std::runtime_error(what) {}
};

// Incompatible tensor shapes. Messages name both shapes.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite value detected at an op boundary, or training divergence.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file. Carries a 1-based line number when known (0 otherwise).
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, int line_no = 0)
        : std::runtime_error(line_no > 0 ? what + " (line " + std::to_string(line_no) + ")" : what),
          line(line_no) {}
    int line;
};

// Artifacts that do not belong together (fingerprint or config mismatch).
struct CompatError : std::runtime_error {
    explicit CompatError(const std::string& what) : std::runtime_error(what) {}
};

// Statistics requested over too few data points.
struct InsufficientDataError : std::runtime_error {
    explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace symrewrite
