#pragma once

#include <stdexcept>
#include <string>

namespace spectracode {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments, mismatched shapes or fields, invalid configuration.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Mathematically undefined operation (division by zero in a field).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An enumeration or counting budget would be exceeded.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// Iterative numerics failed (eigensolver non-convergence, quadrature failure).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Input data is internally inconsistent (e.g. an invalid weight enumerator).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// A code family could not be constructed with the requested parameters.
class ConstructionError : public Error {
public:
    using Error::Error;
};

} // namespace spectracode
