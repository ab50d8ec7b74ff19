#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lastzero {

/// Argument outside the mathematical domain of a function (t <= 0, t >= T, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Per-step fixed-point iteration of the boundary solver ran out of iterations.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(std::size_t step, double residual, const std::string& detail)
        : std::runtime_error(detail), step_(step), residual_(residual) {}

    std::size_t step() const noexcept { return step_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t step_;
    double residual_;
};

/// A structural property (monotonicity, class inequality) could not be kept
/// without a correction larger than the configured slack.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LatticeTooCoarse : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SpecMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Unknown or malformed file schema / version.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lastzero
