#pragma once

// Random operators and closed-form oracles shared by the unit tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "bildsim/hilbert.hpp"
#include "bildsim/rng.hpp"

namespace bildsim::fixtures {

using hilbert::Complex;
using hilbert::Matrix;

inline rng::CounterStream fixture_stream(std::uint64_t seed, std::uint64_t id = 0) {
  return rng::CounterStream(seed, rng::Domain::test_fixtures, id);
}

inline Matrix gaussian_matrix(rng::CounterStream& s, long rows, long cols) {
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = s.circular_normal();
  return m;
}

inline hilbert::HermitianOperator random_hermitian(rng::CounterStream& s, long d) {
  const Matrix x = gaussian_matrix(s, d, d);
  return hilbert::HermitianOperator((x + x.adjoint()) / 2.0);
}

inline hilbert::CovarianceOperator random_covariance(rng::CounterStream& s, long d, long rank) {
  const Matrix y = gaussian_matrix(s, d, rank);
  Matrix b = y * y.adjoint() / static_cast<double>(d);
  b = (b + b.adjoint()).eval() / 2.0;
  return hilbert::CovarianceOperator(hilbert::HermitianOperator(b));
}

/// sum_ij A_ij B_ji.
inline double trace_oracle(const Matrix& a, const Matrix& b) {
  Complex t = 0.0;
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j) t += a(i, j) * b(j, i);
  return t.real();
}

/// Fourth moment of a circular Gaussian by explicit pairing:
/// E[conj(p_i) p_j conj(p_k) p_l] = B_ji B_lk + B_jk B_li.
inline double isserlis_oracle(const Matrix& a, const Matrix& g, const Matrix& b) {
  const long d = a.rows();
  Complex total = 0.0;
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j)
      for (long k = 0; k < d; ++k)
        for (long l = 0; l < d; ++l) total += a(i, j) * g(k, l) * (b(j, i) * b(l, k) + b(j, k) * b(l, i));
  return total.real();
}

/// Discrete measure on +-sqrt(d lambda_i) v_i, weight 1/(2d) each. Its
/// covariance equals B while the law is not Gaussian.
struct DiscreteMeasure {
  std::vector<hilbert::Vector> support;
  double weight = 0.0;

  Matrix covariance() const {
    Matrix c = Matrix::Zero(support.front().size(), support.front().size());
    for (const auto& v : support) c += weight * v * v.adjoint();
    return (c + c.adjoint()) / 2.0;
  }
};

inline DiscreteMeasure discrete_measure(const hilbert::CovarianceOperator& b) {
  DiscreteMeasure m;
  const auto d = b.dim();
  m.weight = 1.0 / (2.0 * static_cast<double>(d));
  for (const auto& pair : hilbert::spectral_decomposition(b.op())) {
    const double r = std::sqrt(static_cast<double>(d) * std::max(pair.value, 0.0));
    m.support.push_back(r * pair.vector);
    m.support.push_back(-r * pair.vector);
  }
  return m;
}

}  // namespace bildsim::fixtures
