#pragma once

#include <stdexcept>
#include <string>

namespace tdho {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluation outside a profile or trajectory domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Two solutions with vanishing Wronskian.
class DegeneratePairError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

class InsufficientGridError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Coherent amplitude too large for the truncated basis.
class TruncationRiskError : public Error {
 public:
  using Error::Error;
};

class InvalidFrequencyError : public Error {
 public:
  using Error::Error;
};

class UnsupportedNormalizationError : public Error {
 public:
  using Error::Error;
};

class MatchingError : public Error {
 public:
  using Error::Error;
};

// Scenario/configuration problem. `field` is the dotted path of the
// offending entry (empty when the text could not be parsed at all).
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)), message_(what) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

}  // namespace tdho
