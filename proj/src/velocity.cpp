#include "bildsim/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "bildsim/errors.hpp"

namespace bildsim::velocity {
namespace {

enum class Direction { forward, backward };

std::string str(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct Accumulator {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double position_sum = 0.0;

  void add(double value, double position) {
    ++count;
    const double delta = value - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (value - mean);
    position_sum += position;
  }
};

void check_bins(const TrajectoryEnsemble& e, const BinSpec& bins) {
  if (!(bins.hi > bins.lo) || bins.count < 1 || !std::isfinite(bins.lo) || !std::isfinite(bins.hi)) {
    throw ValidationError("bins need finite lo < hi and count >= 1", "bins");
  }
  if (bins.particle >= e.n_particles) {
    throw ValidationError("bin particle index " + std::to_string(bins.particle) +
                              " out of range", "bins.particle");
  }
}

VelocityFieldEstimate estimate(const TrajectoryEnsemble& e, double epsilon,
                               const VelocityOptions& options, Direction direction) {
  const auto& bins = options.bins;
  check_bins(e, bins);
  const std::size_t lag = epsilon_lag(e, epsilon);
  const auto refs = reference_snapshots(e, lag, options);
  std::vector<Accumulator> acc(bins.count);
  const double width = bins.width();
  for (std::size_t traj = 0; traj < e.n_trajectories; ++traj) {
    for (std::size_t r : refs) {
      const double x = e.x(traj, r, bins.particle);
      const double slot = std::floor((x - bins.lo) / width);
      if (slot < 0.0 || slot >= static_cast<double>(bins.count)) continue;
      const double increment = direction == Direction::forward
                                   ? e.x(traj, r + lag, bins.particle) - x
                                   : x - e.x(traj, r - lag, bins.particle);
      acc[static_cast<std::size_t>(slot)].add(increment / epsilon, x);
    }
  }
  VelocityFieldEstimate out;
  out.kind = direction == Direction::forward ? VelocityKind::forward : VelocityKind::backward;
  out.epsilon = epsilon;
  out.bin_width = width;
  out.particle = bins.particle;
  out.bins.resize(bins.count);
  for (std::size_t i = 0; i < bins.count; ++i) {
    auto& b = out.bins[i];
    const auto& a = acc[i];
    b.center = bins.center(i);
    b.count = a.count;
    b.mean_position = a.count ? a.position_sum / static_cast<double>(a.count) : b.center;
    b.present = a.count >= std::max<std::size_t>(bins.min_occupancy, 2);
    if (b.present) {
      b.value = a.mean;
      b.std_error = std::sqrt(a.m2 / static_cast<double>(a.count - 1) / static_cast<double>(a.count));
    }
  }
  return out;
}

}  // namespace

const VelocityBin* VelocityFieldEstimate::bin_at(double x) const {
  for (const auto& b : bins) {
    if (std::abs(x - b.center) <= bin_width / 2.0) return &b;
  }
  return nullptr;
}

std::size_t epsilon_lag(const TrajectoryEnsemble& e, double epsilon) {
  if (!(epsilon >= 2.0 * e.dt * (1.0 - 1e-9))) {
    throw ValidationError("epsilon=" + str(epsilon) + " is below 2 dt=" + str(2.0 * e.dt),
                          "epsilon");
  }
  const double spacing = e.snapshot_spacing();
  const double ratio = epsilon / spacing;
  const double lag = std::round(ratio);
  if (lag < 1.0 || std::abs(ratio - lag) > 1e-6 * std::max(1.0, ratio)) {
    throw ValidationError("epsilon=" + str(epsilon) + " is not a multiple of the snapshot spacing " +
                              str(spacing),
                          "epsilon");
  }
  return static_cast<std::size_t>(lag);
}

std::vector<std::size_t> reference_snapshots(const TrajectoryEnsemble& e, std::size_t lag,
                                             const VelocityOptions& options) {
  const std::size_t n = e.n_snapshots();
  const double spacing = e.snapshot_spacing();
  if (n < 2 * lag + 1) {
    throw ValidationError("ensemble has " + std::to_string(n) +
                              " snapshots, too few for the requested increment", "epsilon");
  }
  if (options.at_time) {
    const auto r = static_cast<std::size_t>(std::llround(std::max(0.0, *options.at_time) / spacing));
    if (r < lag || r + lag >= n) {
      throw ValidationError("reference time " + str(*options.at_time) +
                                " leaves no room for the increment inside the run", "at_time");
    }
    return {r};
  }
  const std::size_t stride = options.reference_stride ? options.reference_stride : lag;
  const auto first = std::max<std::size_t>(
      lag, static_cast<std::size_t>(std::ceil(options.skip_before / spacing - 1e-9)));
  std::vector<std::size_t> refs;
  for (std::size_t r = first; r + lag < n; r += stride) refs.push_back(r);
  if (refs.empty()) throw ValidationError("no admissible reference snapshots", "skip_before");
  return refs;
}

VelocityFieldEstimate coarse_velocity_forward(const TrajectoryEnsemble& e, double epsilon,
                                              const VelocityOptions& options) {
  return estimate(e, epsilon, options, Direction::forward);
}

VelocityFieldEstimate coarse_velocity_backward(const TrajectoryEnsemble& e, double epsilon,
                                               const VelocityOptions& options) {
  return estimate(e, epsilon, options, Direction::backward);
}

VelocityFieldEstimate osmotic_velocity(const VelocityFieldEstimate& v_plus,
                                       const VelocityFieldEstimate& v_minus) {
  if (v_plus.kind != VelocityKind::forward || v_minus.kind != VelocityKind::backward) {
    throw ValidationError("osmotic_velocity expects a forward and a backward estimate");
  }
  bool match = v_plus.bins.size() == v_minus.bins.size() && v_plus.epsilon == v_minus.epsilon &&
               v_plus.bin_width == v_minus.bin_width && v_plus.particle == v_minus.particle;
  for (std::size_t i = 0; match && i < v_plus.bins.size(); ++i) {
    match = v_plus.bins[i].center == v_minus.bins[i].center;
  }
  if (!match) throw ValidationError("forward and backward estimates use different bins or epsilon", "bins");

  VelocityFieldEstimate u;
  u.kind = VelocityKind::osmotic;
  u.epsilon = v_plus.epsilon;
  u.bin_width = v_plus.bin_width;
  u.particle = v_plus.particle;
  u.bins.resize(v_plus.bins.size());
  for (std::size_t i = 0; i < u.bins.size(); ++i) {
    const auto& p = v_plus.bins[i];
    const auto& m = v_minus.bins[i];
    auto& b = u.bins[i];
    b.center = p.center;
    b.count = std::min(p.count, m.count);
    b.mean_position = 0.5 * (p.mean_position + m.mean_position);
    b.present = p.present && m.present;
    if (b.present) {
      b.value = 0.5 * (m.value - p.value);
      b.std_error = 0.5 * std::hypot(p.std_error, m.std_error);
    }
  }
  return u;
}

std::vector<WitnessRow> nonsmoothness_witness(const TrajectoryEnsemble& e,
                                              std::span<const double> epsilons, double bin_lo,
                                              double bin_hi, const VelocityOptions& options) {
  if (e.has_momenta()) {
    throw ValidationError("nonsmoothness_witness expects an overdamped (position-only) ensemble");
  }
  VelocityOptions single = options;
  single.bins.lo = bin_lo;
  single.bins.hi = bin_hi;
  single.bins.count = 1;
  std::vector<WitnessRow> rows;
  for (double eps : epsilons) {
    const auto plus = coarse_velocity_forward(e, eps, single);
    const auto minus = coarse_velocity_backward(e, eps, single);
    WitnessRow row;
    row.epsilon = eps;
    row.v_plus = plus.bins.front();
    row.v_minus = minus.bins.front();
    row.gap = std::abs(row.v_plus.value - row.v_minus.value);
    row.gap_error = std::hypot(row.v_plus.std_error, row.v_minus.std_error);
    rows.push_back(row);
  }
  return rows;
}

MomentumResolution phase_space_velocity(const TrajectoryEnsemble& e, double mass, double tau_p,
                                        double epsilon, const PhaseBin& bin) {
  if (!e.has_momenta()) {
    throw ValidationError("phase-space velocities need an underdamped ensemble with momenta");
  }
  if (bin.particle >= e.n_particles) throw ValidationError("particle out of range", "particle");
  const std::size_t lag = epsilon_lag(e, epsilon);
  const auto refs = reference_snapshots(e, lag, VelocityOptions{});
  std::vector<double> plus, minus, momentum;
  for (std::size_t traj = 0; traj < e.n_trajectories; ++traj) {
    for (std::size_t r : refs) {
      const double x = e.x(traj, r, bin.particle);
      const double p = e.p(traj, r, bin.particle);
      if (x < bin.x_lo || x >= bin.x_hi || p < bin.p_lo || p >= bin.p_hi) continue;
      plus.push_back((e.x(traj, r + lag, bin.particle) - x) / epsilon);
      minus.push_back((x - e.x(traj, r - lag, bin.particle)) / epsilon);
      momentum.push_back(p / mass);
    }
  }
  MomentumResolution out;
  out.epsilon = epsilon;
  out.tau_p = tau_p;
  out.v_plus = stats::mean_and_error(plus);
  out.v_minus = stats::mean_and_error(minus);
  out.momentum_velocity = stats::mean_and_error(momentum);
  return out;
}

MomentumResolution momentum_resolution_check(const TrajectoryEnsemble& e,
                                             const brownian::LangevinConfig& config,
                                             double epsilon, const PhaseBin& bin) {
  const double tau_p = config.tau_p();
  if (epsilon > tau_p / 50.0 * (1.0 + 1e-12)) {
    throw ValidationError("epsilon=" + str(epsilon) + " is not small against tau_p=" + str(tau_p) +
                              " (need epsilon <= tau_p/50); at this resolution only the "
                              "coarse-grained velocities v+ and v- are defined",
                          "epsilon");
  }
  return phase_space_velocity(e, config.mass, tau_p, epsilon, bin);
}

std::vector<OsmoticReference> kde_osmotic_reference(const TrajectoryEnsemble& e,
                                                    const VelocityFieldEstimate& u,
                                                    double diffusion,
                                                    const VelocityOptions& options,
                                                    std::size_t batches) {
  if (batches < 2 || batches > e.n_trajectories) {
    throw ValidationError("need 2 <= batches <= n_trajectories", "batches");
  }
  const std::size_t lag = epsilon_lag(e, u.epsilon);
  const auto refs = reference_snapshots(e, lag, options);
  std::vector<double> pooled;
  pooled.reserve(e.n_trajectories * refs.size());
  for (std::size_t traj = 0; traj < e.n_trajectories; ++traj)
    for (std::size_t r : refs) pooled.push_back(e.x(traj, r, u.particle));
  // Positions pooled along one trajectory are strongly correlated, so the
  // bandwidth counts trajectories rather than pooled points.
  const double h = stats::silverman_bandwidth(pooled, e.n_trajectories);
  if (!(h > 0.0)) throw ValidationError("positions have no spread; KDE undefined");

  const std::size_t per_traj = refs.size();
  std::vector<OsmoticReference> out;
  for (const auto& b : u.bins) {
    OsmoticReference ref;
    ref.position = b.mean_position;
    if (!b.present) {
      out.push_back(ref);
      continue;
    }
    std::vector<double> k_sum(batches, 0.0), dk_sum(batches, 0.0);
    for (std::size_t traj = 0; traj < e.n_trajectories; ++traj) {
      const std::size_t batch = traj * batches / e.n_trajectories;
      for (std::size_t j = 0; j < per_traj; ++j) {
        const double z = (b.mean_position - pooled[traj * per_traj + j]) / h;
        if (std::abs(z) > 10.0) continue;
        const double k = std::exp(-0.5 * z * z);
        k_sum[batch] += k;
        dk_sum[batch] += -z / h * k;
      }
    }
    double k_total = 0.0, dk_total = 0.0;
    std::vector<double> per_batch;
    for (std::size_t i = 0; i < batches; ++i) {
      k_total += k_sum[i];
      dk_total += dk_sum[i];
      if (k_sum[i] > 0.0) per_batch.push_back(-diffusion * dk_sum[i] / k_sum[i]);
    }
    if (k_total > 0.0 && per_batch.size() >= 2) {
      ref.value = -diffusion * dk_total / k_total;
      ref.std_error = std::sqrt(stats::sample_variance(per_batch) / static_cast<double>(per_batch.size()));
      ref.present = true;
    }
    out.push_back(ref);
  }
  return out;
}

}  // namespace bildsim::velocity
