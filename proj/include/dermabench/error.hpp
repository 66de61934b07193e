#pragma once

#include <stdexcept>
#include <string>

namespace dermabench {

/// Base of every error the library throws. Callers that only need to
/// distinguish "bad input/config" from "runtime failure" can switch on
/// is_usage_error().
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual bool is_usage_error() const noexcept { return false; }
};

/// Invalid configuration value or combination (bad fraction, batch size, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
  bool is_usage_error() const noexcept override { return true; }
};

/// Dataset layout problems: missing class directory, empty class.
class DatasetError : public Error {
 public:
  using Error::Error;
};

class EmptyClassError : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

/// An image file could not be decoded.
class DecodeError : public Error {
 public:
  DecodeError(std::string path, const std::string& what)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A metric whose denominator is zero. Never silently replaced by 0.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// Class index outside {0, 1}.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Pretrained weights are not present in the local cache.
class AcquisitionError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class IncompatibleCheckpointError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointIntegrityError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, std::size_t batch, const std::string& what)
      : Error(what), epoch_(epoch), batch_(batch) {}
  int epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  int epoch_;
  std::size_t batch_;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class RenderError : public Error {
 public:
  using Error::Error;
};

class FilesystemError : public Error {
 public:
  using Error::Error;
};

}  // namespace dermabench
