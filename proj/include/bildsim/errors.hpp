#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bildsim {

/// Input violates a documented contract (bad shape, non-Hermitian matrix,
/// out-of-range parameter). The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& message, std::string field = {})
      : std::invalid_argument(message), field_(std::move(field)) {}

  /// Name of the offending field or entry, empty when not applicable.
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Measure whose covariance has (numerically) zero trace.
class DegenerateMeasure : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A computation failed on valid input: factorization failure, blow-up of
/// an integrator, violated numerical postcondition. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bildsim
