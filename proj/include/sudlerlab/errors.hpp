#pragma once

#include <stdexcept>
#include <string>

namespace sudlerlab {

// Numeric-guard family: the computation cannot be trusted at the current
// precision/tolerance. CLI exit code 2.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct precision_exhausted : numeric_error {
    explicit precision_exhausted(const std::string& msg) : numeric_error(msg) {}
};

struct singularity_suspect : numeric_error {
    explicit singularity_suspect(const std::string& msg) : numeric_error(msg) {}
};

struct tolerance_not_met : numeric_error {
    explicit tolerance_not_met(const std::string& msg) : numeric_error(msg) {}
};

// Usage family: the request itself is invalid for the given inputs. CLI exit
// code 1.
struct usage_error : std::invalid_argument {
    explicit usage_error(const std::string& msg) : std::invalid_argument(msg) {}
};

struct not_quadratic : usage_error {
    explicit not_quadratic(const std::string& msg) : usage_error(msg) {}
};

struct unsupported : usage_error {
    explicit unsupported(const std::string& msg) : usage_error(msg) {}
};

struct hypothesis_violated : usage_error {
    explicit hypothesis_violated(const std::string& msg) : usage_error(msg) {}
};

struct truncation_flagged : usage_error {
    explicit truncation_flagged(const std::string& msg) : usage_error(msg) {}
};

struct invalid_interval : usage_error {
    explicit invalid_interval(const std::string& msg) : usage_error(msg) {}
};

} // namespace sudlerlab
