#pragma once

#include <stdexcept>
#include <string>

namespace cablekit {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A graph or model failed a structural precondition (see validate_*).
class InvalidGraph : public Error {
 public:
  using Error::Error;
};

/// A numeric argument is outside the operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed interchange input (JSON schema, unknown keys, duplicates).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A computation would exceed a configured resource cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Probability mass or a ball reached the boundary of a finite truncation.
class TruncationError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace cablekit
