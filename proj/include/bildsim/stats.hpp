#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bildsim::stats {

struct MeanError {
  double mean = 0.0;
  double std_error = 0.0;  ///< sample std (unbiased) / sqrt(count)
  std::size_t count = 0;
};

MeanError mean_and_error(std::span<const double> values);

/// Unbiased sample variance.
double sample_variance(std::span<const double> values);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;  ///< sup |F_n - F|
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against N(mean, sd^2).
KsResult ks_test_normal(std::vector<double> samples, double mean, double sd);

/// Silverman's rule of thumb, 0.9 min(sd, IQR/1.34) n^(-1/5).
double silverman_bandwidth(std::span<const double> samples);

/// Same spread estimate, with n replaced by the number of independent units
/// for autocorrelated samples.
double silverman_bandwidth(std::span<const double> samples, std::size_t effective_count);

struct KdePoint {
  double density = 0.0;
  double derivative = 0.0;
};

/// Gaussian kernel density estimate and its x-derivative at x.
KdePoint gaussian_kde(std::span<const double> samples, double bandwidth, double x);

}  // namespace bildsim::stats
