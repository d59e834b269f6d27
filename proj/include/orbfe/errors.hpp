#pragma once

#include <stdexcept>
#include <string>

namespace orbfe {

/// File could not be opened, read, or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data does not conform to the expected format.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input with a sample depth this library does not handle.
class UnsupportedDepthError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Invalid configuration value or key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stream integrity violation (e.g. duplicate sample identity).
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a documented precondition.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace orbfe
