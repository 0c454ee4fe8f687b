#pragma once

#include <stdexcept>
#include <string>

namespace fracmono {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(long expected, long got)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(got)) {}
};

/// Quadrature of a weighted norm whose integrand is not integrable at z = 0.
class SingularIntegrand : public Error {
public:
    using Error::Error;
};

/// Iterative solver stopped without meeting its tolerance.
class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A point was passed where the operator has no (minimal) selection.
class NotInDomain : public Error {
public:
    using Error::Error;
};

}  // namespace fracmono
