#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rlo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Tangent vector used at a point other than its base.
class BasePointMismatch : public Error {
 public:
  using Error::Error;
};

/// Sphere retraction where ||theta + xi|| collapses below the threshold.
class DegenerateRetraction : public Error {
 public:
  using Error::Error;
};

/// FieldSpec and OptimizerState disagree (e.g. adaptive field with no s).
class StateMismatch : public Error {
 public:
  using Error::Error;
};

/// A stochastic gradient containing NaN or Inf. The step is refused.
class PoisonedGradient : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Certificate parameters outside the range the bounds require.
class InadmissibleParameters : public Error {
 public:
  using Error::Error;
};

/// Configuration rejected by validation. `field()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DatasetError : public Error {
 public:
  DatasetError(long line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  long line() const noexcept { return line_; }

 private:
  long line_;
};

}  // namespace rlo
