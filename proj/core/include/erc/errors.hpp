#pragma once

#include <stdexcept>
#include <string>

namespace erc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not fit an operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Token or label id out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// NaN or otherwise non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameters, flags or config files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent corpus files.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Unknown emotion label in a corpus.
class LabelError : public DataError {
 public:
  using DataError::DataError;
};

/// Checkpoint does not match the corpus or config it is used with.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace erc
