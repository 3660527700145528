#pragma once

#include <stdexcept>
#include <string>

namespace pclda {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched dimensions between inputs.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Inputs outside the mathematical domain of an operation (non-PD covariance,
/// invalid priors, negative separation).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Labels missing a class that the estimator needs.
class DegenerateLabelsError : public Error {
 public:
  using Error::Error;
};

/// A requested rank exceeds what the data supports.
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(const std::string& what, long achievable)
      : Error(what), achievable_(achievable) {}
  long achievable_rank() const noexcept { return achievable_; }

 private:
  long achievable_;
};

/// A decomposition failed to converge or produced non-finite output.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A configuration the implementation deliberately refuses.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files (CSV, model files, parameter files).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace pclda
