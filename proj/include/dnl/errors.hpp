#pragma once

#include <stdexcept>
#include <string>

namespace dnl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands live on different grids or have inconsistent lengths.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A parameter lies outside its admissible range.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A state left the domain I of the potential.
class AdmissibilityError : public Error {
public:
    using Error::Error;
};

/// A nonlinear solve did not reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), residual_(last_residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Not enough samples for a fit or a window integral.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace dnl
