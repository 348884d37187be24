#pragma once

#include <stdexcept>
#include <string>

namespace gou {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A series or iterative scheme did not reach its tolerance within its budget.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}

    /// Best error estimate reached before giving up.
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Quadrature could not certify the requested absolute tolerance.
class QuadratureError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

/// Result cannot be represented even in log space.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Malformed or inconsistent configuration / boundary data.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gou
