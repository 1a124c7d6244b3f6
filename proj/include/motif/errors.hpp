#pragma once

#include <stdexcept>
#include <string>

namespace motif {

/// Base of every error raised by the library. The CLI maps subclasses of
/// DataError to exit code 2 and anything else to 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public DataError {
 public:
  IoError(const std::string& path, const std::string& reason)
      : DataError(path + ": " + reason), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class DegenerateInputError : public DataError {
 public:
  using DataError::DataError;
};

class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

class ParameterError : public DataError {
 public:
  using DataError::DataError;
};

class PeriodEstimationError : public DataError {
 public:
  using DataError::DataError;
};

class TrainingError : public DataError {
 public:
  using DataError::DataError;
};

class ModelError : public DataError {
 public:
  using DataError::DataError;
};

class ModelFormatError : public ModelError {
 public:
  using ModelError::ModelError;
};

}  // namespace motif
