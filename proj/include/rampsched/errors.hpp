#pragma once

#include <stdexcept>
#include <string>

namespace rampsched {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid data or parameters (negative power, missing CSV field, bad config key).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Timestamps are not uniformly spaced within the jitter tolerance.
class SpacingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Fewer samples than a periodic profile needs.
class ShortSeriesError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A requested resampling step does not divide the period.
class GridError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Vector length does not match the scenario grid.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A least-squares fit has no unique solution.
class DegenerateFitError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An economics report was requested for a solution that did not converge.
class ReportOnUnconvergedError : public Error {
 public:
  using Error::Error;
};

/// The Hamiltonian system produced a non-finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time_h, double x0, double lambda0);

  double time_h() const noexcept { return time_h_; }
  // Initial state of the integration that blew up.
  double x0() const noexcept { return x0_; }
  double lambda0() const noexcept { return lambda0_; }

 private:
  double time_h_;
  double x0_;
  double lambda0_;
};

}  // namespace rampsched
