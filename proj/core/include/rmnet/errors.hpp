#pragma once

#include <stdexcept>
#include <string>

namespace rmnet {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Spatial or channel dimensions of two operands disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Image values outside their declared range, or mixed ranges in one operation.
class ValueRangeError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A NaN/Inf showed up in activations, losses, or parameters.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling could not produce a mask inside the requested bucket.
class BucketUnsatisfiableError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Writing failed because the device ran out of space.
class DiskFullError : public IoError {
 public:
  using IoError::IoError;
};

// Checkpoint files are truncated, missing, or fail their hash check.
class CorruptCheckpointError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rmnet
