#pragma once

#include <stdexcept>
#include <string>

namespace nucleon {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An angle or argument lies outside the domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid parameter record or control value.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Ground-state search requested outside the existence regime a > 2b.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// A certificate (bracket, witness, monotonicity) could not be established.
class CertificateError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown: step underflow, singular solve, non-convergence.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Configuration or schema violation (CLI layer).
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace nucleon
