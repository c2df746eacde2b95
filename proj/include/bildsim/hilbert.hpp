#pragma once

// Finite-dimensional complex Hilbert space: validated operator types and the
// handful of linear-algebra operations the benches are built on.

#include <Eigen/Dense>
#include <complex>
#include <string_view>
#include <vector>

namespace bildsim::hilbert {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kEigenvalueFloor = -1e-10;
inline constexpr double kUnitTraceTolerance = 1e-12;
inline constexpr double kDegenerateTrace = 1e-14;

/// Throws ValidationError unless `m` is square, non-empty and finite.
void validate_square_finite(const Matrix& m, std::string_view what);

/// Complex matrix equal to its conjugate transpose within
/// kHermitianTolerance (absolute, entrywise). The stored matrix is the exact
/// Hermitian part (M + M*)/2 of the input.
class HermitianOperator {
 public:
  explicit HermitianOperator(const Matrix& m);

  static HermitianOperator identity(Index dim);
  static HermitianOperator zero(Index dim);
  static HermitianOperator diagonal(const std::vector<double>& entries);
  /// |v><v|, scaled by `weight`.
  static HermitianOperator projector(const Vector& v, double weight = 1.0);

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  double trace() const { return m_.trace().real(); }
  double frobenius_norm() const { return m_.norm(); }
  HermitianOperator scaled(double factor) const;

 private:
  struct Unchecked {};
  HermitianOperator(Matrix m, Unchecked) : m_(std::move(m)) {}

  Matrix m_;
};

/// Positive semidefinite (eigenvalues >= kEigenvalueFloor) Hermitian
/// operator. Zero trace is admitted so that the degenerate measure B = 0 is
/// representable; maps that normalize by the trace reject it.
class CovarianceOperator {
 public:
  explicit CovarianceOperator(HermitianOperator op);

  const HermitianOperator& op() const noexcept { return op_; }
  const Matrix& matrix() const noexcept { return op_.matrix(); }
  Index dim() const noexcept { return op_.dim(); }
  double trace() const { return op_.trace(); }

 private:
  HermitianOperator op_;
};

/// Quantum state: PSD Hermitian operator with unit trace.
class DensityOperator {
 public:
  explicit DensityOperator(HermitianOperator op);

  const HermitianOperator& op() const noexcept { return op_; }
  const Matrix& matrix() const noexcept { return op_.matrix(); }
  Index dim() const noexcept { return op_.dim(); }
  /// Tr rho^2.
  double purity() const;

 private:
  HermitianOperator op_;
};

struct Eigenpair {
  double value;
  Vector vector;
};

/// Eigenvalues in ascending order with orthonormal eigenvectors.
std::vector<Eigenpair> spectral_decomposition(const HermitianOperator& h);

/// Ascending eigenvalues only.
Eigen::VectorXd eigenvalues(const HermitianOperator& h);

/// Tr(AB), real for Hermitian A and B.
double trace_product(const HermitianOperator& a, const HermitianOperator& b);

/// B / Tr B. Throws DegenerateMeasure when Tr B <= kDegenerateTrace.
DensityOperator density_from_covariance(const CovarianceOperator& b);

/// Kronecker product A (x) B.
HermitianOperator tensor_product(const HermitianOperator& a,
                                 const HermitianOperator& b);

/// ||AB - BA||_F.
double commutator_norm(const HermitianOperator& a, const HermitianOperator& b);

HermitianOperator pauli_x();
HermitianOperator pauli_y();
HermitianOperator pauli_z();

}  // namespace bildsim::hilbert
