#pragma once

#include <stdexcept>
#include <string>

namespace bisque {

// Base class for all library failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// A numerical procedure failed (non-convergence, indefinite Hessian,
// Cholesky breakdown, non-finite evaluation, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

// Bad configuration, file, or flag.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace bisque
