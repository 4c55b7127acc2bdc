#pragma once

#include <stdexcept>
#include <string>

namespace hhw {

/// Input outside the mathematical domain of an operation (negative time,
/// negative variance, inconsistent correlations, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Numerical failure inside a solver, e.g. a zero pivot in the tridiagonal
/// elimination. The message carries the lattice coordinates of the failure.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested combination is valid input but not supported by the method
/// (American exercise in Monte Carlo, barriers on American options).
class UnsupportedError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or incomplete run configuration. `line` is 0 when the problem
/// is not tied to a single line (a missing key, say).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

}  // namespace hhw
