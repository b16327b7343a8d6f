#pragma once

#include <stdexcept>
#include <string>

namespace polyak {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value was produced where a finite one was required.
class NumericalDomainError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a precondition (shape mismatch, empty input, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// An iterative estimate did not settle within its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_estimate)
      : Error(what), last_estimate_(last_estimate) {}
  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

/// Invalid configuration: bad field value, unknown regime, missing sample count.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Not enough usable points to fit a slope.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Probe found every curvature estimate non-positive.
class DegenerateLandscapeError : public Error {
 public:
  using Error::Error;
};

/// f(theta) <= f(theta*) at a probe point; the oracle's optimum value is wrong.
class OrderingViolationError : public Error {
 public:
  using Error::Error;
};

/// Explicit Euler integration blew up.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; `row()` is 1-based and counts the header as row 1.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row) : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Plot input that cannot be drawn on log-log axes.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace polyak
