#pragma once

#include <stdexcept>
#include <string>

namespace sharpmu {

/// Base of all library errors. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (alpha < 1, x <= 0 for Y_nu, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed input data, e.g. a profile that is not concave.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Requested eigenvalue index cannot be resolved on the given grid.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Iteration failed to converge, pivot breakdown, near-degenerate spectrum.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace sharpmu
