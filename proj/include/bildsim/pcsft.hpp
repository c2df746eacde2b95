#pragma once

// Classical random fields on C^d whose quadratic-form averages are coupled to
// quantum trace averages through the covariance -> density operator map.

#include <cstdint>
#include <span>
#include <vector>

#include "bildsim/hilbert.hpp"

namespace bildsim::pcsft {

using hilbert::CovarianceOperator;
using hilbert::DensityOperator;
using hilbert::HermitianOperator;

/// Zero-mean circular complex Gaussian measure, identified by its covariance.
class FieldMeasure {
 public:
  explicit FieldMeasure(CovarianceOperator covariance);

  const CovarianceOperator& covariance() const noexcept { return covariance_; }
  hilbert::Index dim() const noexcept { return covariance_.dim(); }
  /// L with L L* = B, built from the spectrum with negative eigenvalues
  /// clamped to zero.
  const hilbert::Matrix& sampling_factor() const noexcept { return factor_; }

 private:
  CovarianceOperator covariance_;
  hilbert::Matrix factor_;
};

struct FieldSample {
  hilbert::Vector amplitudes;
};

/// f(phi) = <phi|A_f|phi>.
class QuadraticVariable {
 public:
  explicit QuadraticVariable(HermitianOperator kernel) : kernel_(std::move(kernel)) {}

  const HermitianOperator& kernel() const noexcept { return kernel_; }
  hilbert::Index dim() const noexcept { return kernel_.dim(); }

 private:
  HermitianOperator kernel_;
};

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
};

struct CouplingCheck {
  double lhs;  ///< <f>_p / E_p
  double rhs;  ///< Tr(rho_p A_f)
  double gap;
};

/// The `index`-th draw of the stream `seed`; sample_fields(m, n, s)[k] equals
/// sample_field(m, s, k).
FieldSample sample_field(const FieldMeasure& measure, std::uint64_t seed,
                         std::uint64_t index);

std::vector<FieldSample> sample_fields(const FieldMeasure& measure, std::size_t n,
                                       std::uint64_t seed, unsigned threads = 0);

double quadratic_eval(const QuadraticVariable& v, const FieldSample& phi);

/// ||phi||^2.
double field_energy(const FieldSample& phi);

/// E_p = Tr B.
double average_energy(const FieldMeasure& measure);

/// <f>_p = Tr(A_f B).
double exact_average(const QuadraticVariable& v, const FieldMeasure& measure);

/// Sample mean of f over n draws; std_error uses the unbiased variance.
MonteCarloEstimate mc_average(const QuadraticVariable& v, const FieldMeasure& measure,
                              std::size_t n, std::uint64_t seed, unsigned threads = 0);

/// J_S(p) = B / Tr B.
DensityOperator correspondence_state(const FieldMeasure& measure);

CouplingCheck normalized_coupling_check(const QuadraticVariable& v,
                                        const FieldMeasure& measure);

/// g_p = f / E_p.
QuadraticVariable amplified_variable(const QuadraticVariable& v,
                                     const FieldMeasure& measure);

/// <f g>_p for the circular Gaussian measure (Isserlis):
/// Tr(A B) Tr(G B) + Tr(A B G B).
double exact_pair_correlation(const QuadraticVariable& v, const QuadraticVariable& w,
                              const FieldMeasure& measure);

/// Sample mean of f(phi) g(phi).
MonteCarloEstimate mc_pair_correlation(const QuadraticVariable& v,
                                       const QuadraticVariable& w,
                                       const FieldMeasure& measure, std::size_t n,
                                       std::uint64_t seed, unsigned threads = 0);

/// (1/n) sum phi_k phi_k*.
CovarianceOperator empirical_covariance(std::span<const FieldSample> samples);

}  // namespace bildsim::pcsft
