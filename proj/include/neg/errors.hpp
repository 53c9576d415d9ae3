#pragma once

#include <stdexcept>
#include <string>

namespace neg {

// Bad user input or configuration. The message names the offending field.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A model equation cannot be evaluated at the supplied point (e.g. a region
// with no reachable varieties, or an inconsistent price index).
class ModelError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// An iterative solver ran out of iterations.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_residual, int iterations)
        : std::runtime_error(what), last_residual_(last_residual), iterations_(iterations) {}

    double last_residual() const noexcept { return last_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_residual_;
    int iterations_;
};

}  // namespace neg
