#include "bildsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bildsim/errors.hpp"

namespace bildsim::stats {

MeanError mean_and_error(std::span<const double> values) {
  MeanError out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  out.std_error = values.size() > 1
                      ? std::sqrt(sample_variance(values) / static_cast<double>(values.size()))
                      : 0.0;
  return out;
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // series converges slowly; value is 1 to double precision
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_normal(std::vector<double> samples, double mean, double sd) {
  if (samples.empty()) throw ValidationError("ks_test_normal: no samples");
  if (!(sd > 0.0)) throw ValidationError("ks_test_normal: sd must be positive");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = 0.5 * std::erfc(-(samples[i] - mean) / (sd * std::numbers::sqrt2));
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double root = std::sqrt(n);
  // Stephens' finite-n correction.
  return {d, kolmogorov_survival((root + 0.12 + 0.11 / root) * d)};
}

double silverman_bandwidth(std::span<const double> samples) {
  return silverman_bandwidth(samples, samples.size());
}

double silverman_bandwidth(std::span<const double> samples, std::size_t effective_count) {
  if (samples.size() < 2 || effective_count < 1) return 0.0;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double sd = std::sqrt(sample_variance(samples));
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  return 0.9 * spread * std::pow(static_cast<double>(effective_count), -0.2);
}

KdePoint gaussian_kde(std::span<const double> samples, double bandwidth, double x) {
  KdePoint out;
  if (samples.empty() || !(bandwidth > 0.0)) return out;
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * bandwidth *
                             static_cast<double>(samples.size()));
  for (double s : samples) {
    const double z = (x - s) / bandwidth;
    const double k = std::exp(-0.5 * z * z);
    out.density += k;
    out.derivative += -z / bandwidth * k;
  }
  out.density *= norm;
  out.derivative *= norm;
  return out;
}

}  // namespace bildsim::stats
