#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace fbcom {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a formula (non-positive power, unphysical block, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// kappa_fb <= 0: the cavity sees net gain and rate-normalised quantities are undefined.
class GainRegimeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A square-root argument went negative beyond the rounding allowance.
class NumericalDegeneracyError : public Error {
 public:
  using Error::Error;
};

/// The integration blew up: step-size underflow, non-finite or runaway state.
class DivergenceError : public Error {
 public:
  using Error::Error;
  DivergenceError(const std::string& what, double time, double growth_rate)
      : Error(what), time(time), growth_rate(growth_rate) {}

  /// Model time at which the run was abandoned; NaN if unknown.
  double time = std::numeric_limits<double>::quiet_NaN();
  /// Estimated exponential growth rate of the covariance norm; NaN if unknown.
  double growth_rate = std::numeric_limits<double>::quiet_NaN();
};

/// The modulation frequencies have no common period within the rationalisation tolerance.
class QuasiPeriodicError : public Error {
 public:
  using Error::Error;
};

/// The trajectory did not settle onto a periodic orbit within the allotted time.
class NotConvergedError : public Error {
 public:
  using Error::Error;
};

/// Samples handed to a per-period reduction do not cover exactly one period.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Bad parameter file, override, parameter path or sweep description.
class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace fbcom
