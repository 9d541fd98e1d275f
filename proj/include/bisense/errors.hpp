#pragma once

#include <stdexcept>
#include <string>

namespace bisense {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration (JSON files, CLI options, profile fields).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Operands whose dimensions do not line up (grid/tensor shape conflicts).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Mathematically invalid input to an otherwise well-configured operation
// (all-zero grids, single-class fits, degenerate geometry).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Training failed to make progress (non-finite loss).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Filesystem / serialization failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Serialized artifact carries an unsupported schema version.
class VersionError : public IoError {
 public:
  using IoError::IoError;
};

// Binary payload ends mid-record or disagrees with its manifest.
class CorruptDataError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace bisense
