#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace probsel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV, JSON); carries the 1-based line when known.
class ParseError : public Error {
  public:
    ParseError(const std::string &what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    explicit ParseError(const std::string &what) : Error(what) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_{0};
};

/// Input is well formed but violates the dataset schema.
class SchemaError : public Error {
  public:
    using Error::Error;
};

/// Wrong number of features or mismatched dimensions.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Invalid parameters for a generator, estimator or experiment.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Input that leaves a quantity mathematically undefined.
class DegenerateInputError : public Error {
  public:
    using Error::Error;
};

/// Quadrature grid does not cover the integrand's mass.
class CoverageError : public Error {
  public:
    using Error::Error;
};

/// Bad argument domain (empty pools, length mismatches).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Missing or unusable data (missing files, non-finite values).
class DataError : public Error {
  public:
    using Error::Error;
};

/// Feature kind not supported by the requested operation.
class TypeError : public Error {
  public:
    using Error::Error;
};

/// Model fitting failed (single-class training data, non-finite intermediates).
class FitError : public Error {
  public:
    using Error::Error;
};

}  // namespace probsel
