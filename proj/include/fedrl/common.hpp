#pragma once

#include <stdexcept>
#include <string>

namespace fedrl {

// Error taxonomy. Every throwing path in the library raises one of these so
// callers can react to the category instead of parsing messages.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or width disagreement between tensors / layers.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Request exceeds a fixed resource (e.g. sampling more configs than the grid holds).
class CapacityError : public Error {
 public:
  using Error::Error;
};

// API contract violated at runtime (step after done, epoch regression, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Structurally incompatible federation state (mismatched bundles/encoders).
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

// An expected peer upload is missing from a federation round.
class StalePeerError : public Error {
 public:
  using Error::Error;
};

// A federation round did not complete before its deadline.
class StalledRoundError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized data (wire format, CSV schema, config file).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Serialized data ends before the declared payload.
class TruncationError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Missing or corrupt checkpoint files.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedrl
