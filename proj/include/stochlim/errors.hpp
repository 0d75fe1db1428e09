// errors.hpp: exception types shared by all stochlim modules

#pragma once

#include <stdexcept>
#include <string>

namespace stochlim {

// Input outside the mathematical domain of an operation (e.g. |p| >= sqrt(2)
// for the small-momentum expansion, x = 0 for the oscillating-exponent limit).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Operation requested on a configuration it does not handle
// (e.g. a closed-form shell radius for a momentum-dependent dispersion).
class UnsupportedError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Adaptive quadrature exhausted its subdivision budget.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, double error_estimate, double value_scale)
        : std::runtime_error(what), error_estimate_(error_estimate), value_scale_(value_scale) {}

    double error_estimate() const noexcept { return error_estimate_; }
    double value_scale() const noexcept { return value_scale_; }

private:
    double error_estimate_;
    double value_scale_;
};

// Too few curve samples inside a tail-fit window.
class InsufficientSamplesError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Invalid or inconsistent configuration document.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace stochlim
