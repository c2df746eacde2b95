#include "bildsim/hilbert.hpp"

#include <cmath>
#include <string>

#include "bildsim/errors.hpp"

namespace bildsim::hilbert {
namespace {

void require_same_dim(const HermitianOperator& a, const HermitianOperator& b,
                      std::string_view op) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch(std::string(op) + ": dimension mismatch (" +
                            std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()) + ")");
  }
}

Eigen::SelfAdjointEigenSolver<Matrix> solve(const Matrix& m,
                                            bool with_vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(
      m, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigensolver did not converge");
  }
  return solver;
}

}  // namespace

void validate_square_finite(const Matrix& m, std::string_view what) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw ValidationError(std::string(what) + ": expected a non-empty square matrix, got " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) {
        const std::string entry = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        throw ValidationError(std::string(what) + ": non-finite entry " + entry, entry);
      }
    }
  }
}

HermitianOperator::HermitianOperator(const Matrix& m) {
  validate_square_finite(m, "HermitianOperator");
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = i; j < m.cols(); ++j) {
      const double deviation = std::abs(m(i, j) - std::conj(m(j, i)));
      if (deviation > kHermitianTolerance) {
        const std::string entry = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        throw ValidationError("matrix is not Hermitian at entry " + entry +
                                  ": |M_ij - conj(M_ji)| = " + std::to_string(deviation),
                              entry);
      }
    }
  }
  m_ = (m + m.adjoint()) / 2.0;
}

HermitianOperator HermitianOperator::identity(Index dim) {
  return HermitianOperator(Matrix::Identity(dim, dim));
}

HermitianOperator HermitianOperator::zero(Index dim) {
  return HermitianOperator(Matrix::Zero(dim, dim));
}

HermitianOperator HermitianOperator::diagonal(const std::vector<double>& entries) {
  Matrix m = Matrix::Zero(static_cast<Index>(entries.size()),
                          static_cast<Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    m(static_cast<Index>(i), static_cast<Index>(i)) = entries[i];
  }
  return HermitianOperator(m);
}

HermitianOperator HermitianOperator::projector(const Vector& v, double weight) {
  Matrix m = weight * (v * v.adjoint());
  return HermitianOperator((m + m.adjoint()) / 2.0);
}

HermitianOperator HermitianOperator::scaled(double factor) const {
  if (!std::isfinite(factor)) throw ValidationError("non-finite scale factor");
  return HermitianOperator(m_ * factor, Unchecked{});
}

CovarianceOperator::CovarianceOperator(HermitianOperator op) : op_(std::move(op)) {
  const double lowest = eigenvalues(op_)(0);
  if (lowest < kEigenvalueFloor) {
    throw ValidationError("covariance is not positive semidefinite (lowest eigenvalue " +
                          std::to_string(lowest) + ")");
  }
}

DensityOperator::DensityOperator(HermitianOperator op) : op_(std::move(op)) {
  const double lowest = eigenvalues(op_)(0);
  if (lowest < kEigenvalueFloor) {
    throw ValidationError("density operator is not positive semidefinite (lowest eigenvalue " +
                          std::to_string(lowest) + ")");
  }
  const double tr = op_.trace();
  if (std::abs(tr - 1.0) > kUnitTraceTolerance) {
    throw ValidationError("density operator trace is " + std::to_string(tr) + ", expected 1");
  }
}

double DensityOperator::purity() const { return trace_product(op_, op_); }

std::vector<Eigenpair> spectral_decomposition(const HermitianOperator& h) {
  const auto solver = solve(h.matrix(), true);
  std::vector<Eigenpair> out;
  out.reserve(static_cast<std::size_t>(h.dim()));
  for (Index i = 0; i < h.dim(); ++i) {
    out.push_back({solver.eigenvalues()(i), solver.eigenvectors().col(i)});
  }
  return out;
}

Eigen::VectorXd eigenvalues(const HermitianOperator& h) {
  return solve(h.matrix(), false).eigenvalues();
}

double trace_product(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a, b, "trace_product");
  // Tr(AB) = sum_ij A_ij B_ji; for Hermitian A, B this is conj(Tr(BA)).
  const Complex tr = a.matrix().cwiseProduct(b.matrix().transpose()).sum();
  const double scale = a.frobenius_norm() * b.frobenius_norm();
  if (std::abs(tr.imag()) > 1e-10 * std::max(scale, 1e-300)) {
    throw NumericalError("trace_product: imaginary residue " + std::to_string(tr.imag()));
  }
  return tr.real();
}

DensityOperator density_from_covariance(const CovarianceOperator& b) {
  const double tr = b.trace();
  if (!(tr > kDegenerateTrace)) {
    throw DegenerateMeasure("covariance trace " + std::to_string(tr) +
                            " is too small to normalize (degenerate measure)");
  }
  return DensityOperator(b.op().scaled(1.0 / tr));
}

HermitianOperator tensor_product(const HermitianOperator& a, const HermitianOperator& b) {
  const Index da = a.dim();
  const Index db = b.dim();
  Matrix k(da * db, da * db);
  for (Index i = 0; i < da; ++i) {
    for (Index j = 0; j < da; ++j) {
      k.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
    }
  }
  return HermitianOperator(k);
}

double commutator_norm(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a, b, "commutator_norm");
  return (a.matrix() * b.matrix() - b.matrix() * a.matrix()).norm();
}

HermitianOperator pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return HermitianOperator(m);
}

HermitianOperator pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return HermitianOperator(m);
}

HermitianOperator pauli_z() { return HermitianOperator::diagonal({1.0, -1.0}); }

}  // namespace bildsim::hilbert
