#pragma once

// Coarse-grained velocities estimated from trajectory ensembles at a finite
// time increment epsilon:
//   v+(x) = E[x(t+eps) - x(t) | x(t) = x] / eps
//   v-(x) = E[x(t) - x(t-eps) | x(t) = x] / eps
//   u(x)  = (v-(x) - v+(x)) / 2            (osmotic velocity, = -D d ln P)

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "bildsim/brownian.hpp"
#include "bildsim/stats.hpp"

namespace bildsim::velocity {

using brownian::TrajectoryEnsemble;

inline constexpr std::size_t kDefaultMinOccupancy = 200;
/// Trajectory blocks for batch-means errors of the KDE reference.
inline constexpr std::size_t kDefaultKdeBatches = 50;

struct BinSpec {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t count = 10;
  std::size_t particle = 0;
  std::size_t min_occupancy = kDefaultMinOccupancy;

  double width() const { return (hi - lo) / static_cast<double>(count); }
  double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * width(); }
};

struct VelocityOptions {
  BinSpec bins;
  /// Use only the snapshot closest to this time instead of pooling.
  std::optional<double> at_time;
  /// Spacing of pooled reference snapshots; 0 means one increment length so
  /// pooled increments of one trajectory do not overlap.
  std::size_t reference_stride = 0;
  /// Pool only reference times >= skip_before.
  double skip_before = 0.0;
};

struct VelocityBin {
  double center = 0.0;
  /// Mean of x(t) over the conditioning set.
  double mean_position = 0.0;
  std::size_t count = 0;
  double value = std::numeric_limits<double>::quiet_NaN();
  double std_error = std::numeric_limits<double>::quiet_NaN();
  /// False when count < min_occupancy; value and std_error are NaN then.
  bool present = false;
};

enum class VelocityKind { forward, backward, osmotic };

struct VelocityFieldEstimate {
  VelocityKind kind = VelocityKind::forward;
  double epsilon = 0.0;
  double bin_width = 0.0;
  std::size_t particle = 0;
  std::vector<VelocityBin> bins;

  /// Bin whose range contains x, or nullptr.
  const VelocityBin* bin_at(double x) const;
};

/// Snapshot indices used as reference times t for increment length `lag`
/// (in snapshots). Forward and backward estimators share this set.
std::vector<std::size_t> reference_snapshots(const TrajectoryEnsemble& e, std::size_t lag,
                                             const VelocityOptions& options);

/// Increment length in snapshots; throws if epsilon < 2 dt or is not a
/// multiple of the snapshot spacing.
std::size_t epsilon_lag(const TrajectoryEnsemble& e, double epsilon);

VelocityFieldEstimate coarse_velocity_forward(const TrajectoryEnsemble& e, double epsilon,
                                              const VelocityOptions& options);
VelocityFieldEstimate coarse_velocity_backward(const TrajectoryEnsemble& e, double epsilon,
                                               const VelocityOptions& options);

/// Per-bin (v- - v+)/2 with errors added in quadrature.
VelocityFieldEstimate osmotic_velocity(const VelocityFieldEstimate& v_plus,
                                       const VelocityFieldEstimate& v_minus);

struct WitnessRow {
  double epsilon = 0.0;
  VelocityBin v_plus;
  VelocityBin v_minus;
  double gap = 0.0;        ///< |v+ - v-|
  double gap_error = 0.0;
};

/// v+ and v- in a single spatial bin across increments. Overdamped
/// ensembles only.
std::vector<WitnessRow> nonsmoothness_witness(const TrajectoryEnsemble& e,
                                              std::span<const double> epsilons, double bin_lo,
                                              double bin_hi, const VelocityOptions& options = {});

struct PhaseBin {
  double x_lo = -std::numeric_limits<double>::infinity();
  double x_hi = std::numeric_limits<double>::infinity();
  double p_lo = -0.1;
  double p_hi = 0.1;
  std::size_t particle = 0;
};

struct MomentumResolution {
  double epsilon = 0.0;
  double tau_p = 0.0;
  stats::MeanError v_plus;
  stats::MeanError v_minus;
  /// p(t)/m averaged over the same conditioning set.
  stats::MeanError momentum_velocity;
};

/// v+ and v- conditioned on (x(t), p(t)) in a phase-space bin, no regime
/// guard.
MomentumResolution phase_space_velocity(const TrajectoryEnsemble& e, double mass,
                                        double tau_p, double epsilon, const PhaseBin& bin);

/// phase_space_velocity restricted to epsilon <= tau_p / 50, where v+ and v-
/// should both approach p/m.
MomentumResolution momentum_resolution_check(const TrajectoryEnsemble& e,
                                             const brownian::LangevinConfig& config,
                                             double epsilon, const PhaseBin& bin);

struct OsmoticReference {
  double position = 0.0;
  double value = std::numeric_limits<double>::quiet_NaN();  ///< -D d/dx ln P_hat
  double std_error = std::numeric_limits<double>::quiet_NaN();
  bool present = false;
};

/// -D d/dx ln P_hat at each present bin's mean position, where P_hat is a
/// Gaussian KDE of the positions in the same reference snapshots used for
/// `u`. Bandwidth: Silverman's rule with n = number of trajectories. Errors
/// are batch means over trajectory blocks.
std::vector<OsmoticReference> kde_osmotic_reference(const TrajectoryEnsemble& e,
                                                    const VelocityFieldEstimate& u,
                                                    double diffusion,
                                                    const VelocityOptions& options,
                                                    std::size_t batches = kDefaultKdeBatches);

}  // namespace bildsim::velocity
