#pragma once

#include <stdexcept>
#include <string>

namespace nodallab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree (matrix sizes, jet variable counts, ...).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A result cannot be decided within the configured truncation order.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Bad user configuration (CLI flags, config file, unknown names).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nodallab
