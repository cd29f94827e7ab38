#pragma once

#include <stdexcept>
#include <string>

namespace tdt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents; the message names the offending line or field.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Well-formed data that violates a structural invariant (duplicate ids,
/// mismatched dimensions, misaligned input sequences).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Bad argument to an operation (empty subset, index out of range, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Problem size exceeds what an operation supports.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A statistic that is undefined for the given data (e.g. rates with n = 0).
class UndefinedStatisticError : public Error {
 public:
  using Error::Error;
};

/// An operation was called in a state its contract does not allow.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An operation would produce an empty result it cannot represent.
class EmptyResultError : public Error {
 public:
  using Error::Error;
};

/// Invalid harness configuration; raised before any program is executed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdt
