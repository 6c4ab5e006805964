#pragma once

#include <stdexcept>
#include <string>

namespace fuseval {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file contents (bad magic, truncated header, ...).
struct FormatError : Error {
  using Error::Error;
};

// Well-formed input that the library deliberately does not handle.
struct UnsupportedError : Error {
  using Error::Error;
};

// Invalid voxel data (non-finite values, out-of-range probabilities, ...).
struct DataError : Error {
  using Error::Error;
};

// A voxel whose probability channels sum to zero.
struct DegenerateVoxelError : DataError {
  using DataError::DataError;
};

// Filesystem-level failure.
struct IoError : Error {
  using Error::Error;
};

// Mismatched dims/spacing/channels between volumes.
struct ShapeError : Error {
  using Error::Error;
};

// Invalid configuration value or schema violation.
struct ConfigError : Error {
  using Error::Error;
};

// Invalid region/shape specification.
struct SpecError : Error {
  using Error::Error;
};

// Violated operation precondition (e.g. marker not inside limit).
struct PreconditionError : Error {
  using Error::Error;
};

}  // namespace fuseval
