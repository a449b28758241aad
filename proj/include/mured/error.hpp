#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mured {

/// Root of every exception thrown by the library. The CLI maps these to exit code 1.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Table violates its invariants (negative/non-finite cells, zero total, shape mismatch).
class invalid_table : public error {
public:
    using error::error;
};

class unknown_variable : public error {
public:
    explicit unknown_variable(const std::string& name)
        : error("unknown variable '" + name + "'"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Malformed argument to an otherwise valid call (empty subset, overlap, bad size...).
class invalid_argument : public error {
public:
    using error::error;
};

/// Shannon redundancy asked of a single-outcome channel (H_max = 0).
class undefined_redundancy : public error {
public:
    using error::error;
};

class subset_too_large : public error {
public:
    subset_too_large(std::size_t size, std::size_t limit)
        : error("subset of " + std::to_string(size) + " variables exceeds the limit of " +
                std::to_string(limit)) {}
};

/// Zero variance (pearson) or zero norm (cosine).
class undefined_similarity : public error {
public:
    using error::error;
};

class non_convergence : public error {
public:
    non_convergence(std::size_t iterations, double residual)
        : error("power iteration did not converge after " + std::to_string(iterations) +
                " iterations (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double last_residual() const noexcept { return residual_; }

private:
    double residual_;
};

class degenerate_spectrum : public error {
public:
    using error::error;
};

/// Input text could not be parsed. `line()` is 1-based, 0 when not applicable.
class parse_error : public error {
public:
    parse_error(const std::string& what, std::size_t line = 0)
        : error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Two independent evaluations of the same identity disagreed beyond tolerance.
class identity_violation : public error {
public:
    using error::error;
};

}  // namespace mured
