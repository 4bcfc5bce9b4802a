#pragma once

#include <stdexcept>
#include <string>

namespace wulffflow {

// Base of every error raised by the library. The CLI maps the concrete
// type to a process exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments: non-finite input, violated preconditions, geometry that
// does not fit the torus.
class InputError : public Error {
public:
    using Error::Error;
};

// Evaluation outside the domain of a function (e.g. Dσ at p = 0).
class DomainError : public Error {
public:
    using Error::Error;
};

// An iterative numerical procedure failed (quadrature, polar ascent).
class NumericError : public Error {
public:
    using Error::Error;
};

// Configuration rejected (schema or a solver gate).
class ConfigError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, double residual)
        : NumericError(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// A mathematical invariant that must hold was observed to fail.
class InvariantError : public Error {
public:
    using Error::Error;
};

}  // namespace wulffflow
