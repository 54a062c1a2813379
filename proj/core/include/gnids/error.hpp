#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gnids {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV header or feature schema does not match what an operation expects.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

/// Invalid synthetic pattern specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A forward computation produced NaN or infinity.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// API called in a state where it is not allowed (backward without tape,
/// message passing past the last iteration, untrained model, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, int epoch, int batch)
      : Error(what), epoch_(epoch), batch_(batch) {}
  int epoch() const { return epoch_; }
  int batch() const { return batch_; }

 private:
  int epoch_;
  int batch_;
};

/// Configuration validation failure; carries every violated key.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

}  // namespace gnids
