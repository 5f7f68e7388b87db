#pragma once

#include <stdexcept>
#include <string>

namespace hpo {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value, dimension or argument violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The Gram matrix could not be factored even after the maximum diagonal jitter.
class SurrogateSingular : public Error {
 public:
  using Error::Error;
};

/// A classifier failed to train (divergence, non-convergence).
class TrainingFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (dataset, prediction or space files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Every trial of a search run failed.
class NoSuccessfulTrials : public Error {
 public:
  NoSuccessfulTrials() : Error("no successful trials") {}
};

}  // namespace hpo
