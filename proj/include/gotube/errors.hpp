#pragma once

#include <stdexcept>
#include <string>

namespace gotube {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// f or Df produced a non-finite value.
class IntegrationDomainError : public Error {
 public:
  using Error::Error;
};

/// The integrator could not make progress (step-size underflow, non-finite
/// state). `last_time()` is the last time at which the solution was valid.
class IntegrationBlowupError : public Error {
 public:
  IntegrationBlowupError(const std::string& what, double last_time)
      : Error(what), last_time_(last_time) {}
  double last_time() const noexcept { return last_time_; }

 private:
  double last_time_;
};

class UnknownSystemError : public Error {
 public:
  using Error::Error;
};

/// CT-RNN weight payload is malformed. `field()` is a JSON-pointer-like path.
class WeightFormatError : public Error {
 public:
  WeightFormatError(const std::string& field, const std::string& message)
      : Error(field + ": " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

/// Sample set has zero variance; no extreme-value fit exists.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration; carries the offending field name.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : Error(field + ": " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace gotube
