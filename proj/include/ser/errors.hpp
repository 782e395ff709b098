#pragma once

#include <stdexcept>
#include <string>

namespace ser {

// Data-level failures (bad files, bad corpora, bad shapes). CLI exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedHeader : DataError {
  using DataError::DataError;
};

struct UnsupportedEncoding : DataError {
  using DataError::DataError;
};

struct EmptyCorpus : DataError {
  using DataError::DataError;
};

struct ClassTooSmall : DataError {
  using DataError::DataError;
};

struct TooFewEntries : DataError {
  using DataError::DataError;
};

struct FeatureStoreMissing : DataError {
  using DataError::DataError;
};

struct ShapeMismatch : DataError {
  using DataError::DataError;
};

struct ClipTooShort : DataError {
  using DataError::DataError;
};

struct IoError : DataError {
  using DataError::DataError;
};

// Numerical failures (NaN/Inf in data or training). CLI exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteInput : NumericError {
  using NumericError::NumericError;
};

struct NonFiniteLoss : NumericError {
  using NumericError::NumericError;
};

struct DegenerateBatch : NumericError {
  using NumericError::NumericError;
};

}  // namespace ser
