#include "bildsim/pcsft.hpp"

#include <cmath>
#include <string>

#include "bildsim/errors.hpp"
#include "bildsim/rng.hpp"

namespace bildsim::pcsft {
namespace {

void require_dim(hilbert::Index expected, hilbert::Index got, const char* what) {
  if (expected != got) {
    throw DimensionMismatch(std::string(what) + ": dimension mismatch (" +
                            std::to_string(expected) + " vs " + std::to_string(got) + ")");
  }
}

double checked_energy(const FieldMeasure& measure) {
  const double energy = average_energy(measure);
  if (!(energy > hilbert::kDegenerateTrace)) {
    throw DegenerateMeasure("average field energy " + std::to_string(energy) +
                            " is too small (degenerate measure)");
  }
  return energy;
}

MonteCarloEstimate summarize(const std::vector<double>& values, std::uint64_t seed) {
  const auto n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double variance = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(variance / static_cast<double>(n)), n, seed};
}

template <typename F>
MonteCarloEstimate estimate(const FieldMeasure& measure, std::size_t n, std::uint64_t seed,
                            unsigned threads, F&& statistic) {
  if (n < 2) throw ValidationError("Monte Carlo estimate needs n >= 2", "n_samples");
  std::vector<double> values(n);
  rng::parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      values[k] = statistic(sample_field(measure, seed, k));
    }
  });
  return summarize(values, seed);
}

}  // namespace

FieldMeasure::FieldMeasure(CovarianceOperator covariance)
    : covariance_(std::move(covariance)) {
  const auto spectrum = hilbert::spectral_decomposition(covariance_.op());
  const auto d = covariance_.dim();
  factor_ = hilbert::Matrix::Zero(d, d);
  for (hilbert::Index i = 0; i < d; ++i) {
    const double lambda = spectrum[static_cast<std::size_t>(i)].value;
    if (lambda > 0.0) factor_.col(i) = std::sqrt(lambda) * spectrum[static_cast<std::size_t>(i)].vector;
  }
  if (!factor_.allFinite()) throw NumericalError("covariance factorization produced non-finite entries");
}

FieldSample sample_field(const FieldMeasure& measure, std::uint64_t seed, std::uint64_t index) {
  rng::CounterStream stream(seed, rng::Domain::field_samples, index);
  hilbert::Vector z(measure.dim());
  for (hilbert::Index j = 0; j < z.size(); ++j) z(j) = stream.circular_normal();
  return {measure.sampling_factor() * z};
}

std::vector<FieldSample> sample_fields(const FieldMeasure& measure, std::size_t n,
                                       std::uint64_t seed, unsigned threads) {
  if (n < 1) throw ValidationError("sample_fields needs n >= 1", "n_samples");
  std::vector<FieldSample> out(n);
  rng::parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) out[k] = sample_field(measure, seed, k);
  });
  return out;
}

double quadratic_eval(const QuadraticVariable& v, const FieldSample& phi) {
  require_dim(v.dim(), phi.amplitudes.size(), "quadratic_eval");
  const hilbert::Complex value = phi.amplitudes.dot(v.kernel().matrix() * phi.amplitudes);
  const double bound = 1e-10 * v.kernel().frobenius_norm() * phi.amplitudes.squaredNorm();
  if (std::abs(value.imag()) > std::max(bound, 1e-300)) {
    throw NumericalError("quadratic_eval: imaginary residue " + std::to_string(value.imag()));
  }
  return value.real();
}

double field_energy(const FieldSample& phi) { return phi.amplitudes.squaredNorm(); }

double average_energy(const FieldMeasure& measure) { return measure.covariance().trace(); }

double exact_average(const QuadraticVariable& v, const FieldMeasure& measure) {
  require_dim(v.dim(), measure.dim(), "exact_average");
  return hilbert::trace_product(v.kernel(), measure.covariance().op());
}

MonteCarloEstimate mc_average(const QuadraticVariable& v, const FieldMeasure& measure,
                              std::size_t n, std::uint64_t seed, unsigned threads) {
  require_dim(v.dim(), measure.dim(), "mc_average");
  return estimate(measure, n, seed, threads,
                  [&](const FieldSample& phi) { return quadratic_eval(v, phi); });
}

DensityOperator correspondence_state(const FieldMeasure& measure) {
  return hilbert::density_from_covariance(measure.covariance());
}

CouplingCheck normalized_coupling_check(const QuadraticVariable& v,
                                        const FieldMeasure& measure) {
  const double energy = checked_energy(measure);
  const double lhs = exact_average(v, measure) / energy;
  const double rhs = hilbert::trace_product(correspondence_state(measure).op(), v.kernel());
  return {lhs, rhs, std::abs(lhs - rhs)};
}

QuadraticVariable amplified_variable(const QuadraticVariable& v, const FieldMeasure& measure) {
  const double energy = checked_energy(measure);
  return QuadraticVariable(v.kernel().scaled(1.0 / energy));
}

double exact_pair_correlation(const QuadraticVariable& v, const QuadraticVariable& w,
                              const FieldMeasure& measure) {
  require_dim(v.dim(), measure.dim(), "exact_pair_correlation");
  require_dim(w.dim(), measure.dim(), "exact_pair_correlation");
  const auto& b = measure.covariance().matrix();
  const hilbert::Matrix ab = v.kernel().matrix() * b;
  const hilbert::Matrix gb = w.kernel().matrix() * b;
  const hilbert::Complex fourth = (ab * gb).trace();
  return ab.trace().real() * gb.trace().real() + fourth.real();
}

MonteCarloEstimate mc_pair_correlation(const QuadraticVariable& v, const QuadraticVariable& w,
                                       const FieldMeasure& measure, std::size_t n,
                                       std::uint64_t seed, unsigned threads) {
  require_dim(v.dim(), measure.dim(), "mc_pair_correlation");
  require_dim(w.dim(), measure.dim(), "mc_pair_correlation");
  return estimate(measure, n, seed, threads, [&](const FieldSample& phi) {
    return quadratic_eval(v, phi) * quadratic_eval(w, phi);
  });
}

CovarianceOperator empirical_covariance(std::span<const FieldSample> samples) {
  if (samples.size() < 2) {
    throw ValidationError("empirical_covariance needs at least 2 samples", "samples");
  }
  const auto d = samples.front().amplitudes.size();
  hilbert::Matrix sum = hilbert::Matrix::Zero(d, d);
  for (const auto& s : samples) {
    require_dim(d, s.amplitudes.size(), "empirical_covariance");
    sum.noalias() += s.amplitudes * s.amplitudes.adjoint();
  }
  sum /= static_cast<double>(samples.size());
  return CovarianceOperator(HermitianOperator(sum));
}

}  // namespace bildsim::pcsft
