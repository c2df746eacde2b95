#pragma once

// Consistency check between an overdamped ensemble and the Fokker-Planck
// equation. The empirical density and drift flux are smoothed with a
// Gaussian kernel K_h, which commutes with the operator:
//   R = d_t (K*P) + sum_i d_i (K*(f_i P)) - sum_i D_i d_ii (K*P)
// vanishes up to sampling noise and the time-difference error.

#include <cstddef>
#include <vector>

#include "bildsim/brownian.hpp"

namespace bildsim::fokker_planck {

inline constexpr std::size_t kMinSamples = 100000;

struct ResidualOptions {
  /// Centre snapshot; time derivative uses snapshots centre +- half_window.
  std::size_t snapshot = 1;
  std::size_t half_window = 1;
  /// Grid points per dimension; 0 picks 81 (1-D) or 41 (2-D).
  std::size_t grid_points = 0;
  /// Grid spans mean +- grid_sds standard deviations of the centre snapshot.
  double grid_sds = 3.0;
  /// Kernel bandwidth as a multiple of the per-axis sd; 0 picks n^(-1/(d+8)).
  double bandwidth_factor = 0.0;
};

struct ResidualReport {
  std::size_t dimension = 0;
  std::size_t n_samples = 0;
  std::vector<double> bandwidth;
  double time_norm = 0.0;       ///< || d_t P ||
  double drift_norm = 0.0;      ///< || div (f P) ||
  double diffusion_norm = 0.0;  ///< || sum D_i d_ii P ||
  double residual_norm = 0.0;   ///< || R ||
  /// residual_norm / max(time_norm, drift_norm, diffusion_norm).
  double normalized = 0.0;
};

/// Requires an overdamped ensemble of one or two particles with at least
/// kMinSamples trajectories.
ResidualReport fokker_planck_residual(const brownian::TrajectoryEnsemble& ensemble,
                                      const brownian::LangevinConfig& config,
                                      const ResidualOptions& options);

}  // namespace bildsim::fokker_planck
