#pragma once

// Brownian particles at two levels of description: underdamped Langevin
// dynamics in phase space, and the overdamped position diffusion whose
// transition density obeys the Fokker-Planck equation
//   d_t P = -sum_i d_i [f_i P] + sum_i D_i d_ii P,   f_i = -d_i U / gamma,
//   D_i = T_i / gamma   (gamma = 1 under --paper-units).

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bildsim::brownian {

enum class PotentialKind { free, harmonic, polynomial };

/// U(x) = sum_i u_i(x_i) + (coupling/2) sum_{i<j} (x_i - x_j)^2, where u_i is
/// 0 (free), k_i x^2 / 2 (harmonic) or sum_n c_n x^n (polynomial).
class Potential {
 public:
  static Potential free(std::size_t n_particles, double coupling = 0.0);
  static Potential harmonic(std::vector<double> stiffness, double coupling = 0.0);
  static Potential polynomial(std::vector<double> coefficients, std::size_t n_particles,
                              double coupling = 0.0);

  PotentialKind kind() const noexcept { return kind_; }
  std::size_t n_particles() const noexcept { return n_particles_; }
  const std::vector<double>& stiffness() const noexcept { return stiffness_; }
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  double coupling() const noexcept { return coupling_; }

  double energy(std::span<const double> x) const;
  /// out_i = -d_i U(x).
  void force(std::span<const double> x, std::span<double> out) const;
  /// Constant Hessian of quadratic potentials; nullopt for polynomials.
  std::optional<Eigen::MatrixXd> hessian() const;

 private:
  Potential(PotentialKind kind, std::size_t n, double coupling);

  PotentialKind kind_;
  std::size_t n_particles_;
  double coupling_;
  std::vector<double> stiffness_;
  std::vector<double> coefficients_;
};

struct InitialCondition {
  enum class Kind { point, stationary, uniform };
  Kind kind = Kind::point;
  /// Per-particle start (point), or the position of unconfined coordinates
  /// (stationary). Empty means zeros.
  std::vector<double> x0;
  /// Per-particle momenta for point starts of underdamped runs.
  std::vector<double> p0;
  double low = -1.0;
  double high = 1.0;
};

enum class Integrator { euler_maruyama, exponential_euler };

struct LangevinConfig {
  std::size_t n_particles = 1;
  double mass = 1.0;
  double friction = 1.0;
  /// One entry per particle, or a single entry shared by all.
  std::vector<double> temperatures{1.0};
  Potential potential = Potential::free(1);
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t n_trajectories = 1000;
  std::uint64_t seed = 0;
  /// Friction fixed to 1 so the overdamped equation reads exactly
  /// d_t P = -d(fP) + T d^2 P.
  bool paper_units = false;
  InitialCondition initial;
  /// Steps between stored snapshots. The run is extended to a whole number
  /// of strides.
  std::size_t record_stride = 1;
  Integrator integrator = Integrator::euler_maruyama;

  double gamma() const noexcept { return paper_units ? 1.0 : friction; }
  double temperature(std::size_t particle) const;
  /// Overdamped diffusion coefficient T_i / gamma.
  double diffusion(std::size_t particle) const { return temperature(particle) / gamma(); }
  double tau_p() const noexcept { return mass / gamma(); }
  std::size_t n_steps() const;

  /// Checks the level-independent invariants; throws ValidationError naming
  /// the field.
  void validate() const;
  std::uint64_t hash() const;
};

/// Snapshots of many independent realizations.
struct TrajectoryEnsemble {
  std::vector<double> times;
  std::size_t n_trajectories = 0;
  std::size_t n_particles = 0;
  /// Layout [trajectory][snapshot][particle].
  std::vector<double> positions;
  /// Same layout as positions; empty for overdamped runs.
  std::vector<double> momenta;
  double dt = 0.0;
  std::size_t record_stride = 1;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  std::size_t n_snapshots() const noexcept { return times.size(); }
  bool has_momenta() const noexcept { return !momenta.empty(); }
  double snapshot_spacing() const noexcept { return dt * static_cast<double>(record_stride); }
  std::size_t offset(std::size_t traj, std::size_t snap, std::size_t particle = 0) const {
    return (traj * times.size() + snap) * n_particles + particle;
  }
  double x(std::size_t traj, std::size_t snap, std::size_t particle = 0) const {
    return positions[offset(traj, snap, particle)];
  }
  double p(std::size_t traj, std::size_t snap, std::size_t particle = 0) const {
    return momenta[offset(traj, snap, particle)];
  }
  /// Positions of one particle across trajectories at one snapshot.
  std::vector<double> positions_at(std::size_t snap, std::size_t particle = 0) const;
  std::vector<double> momenta_at(std::size_t snap, std::size_t particle = 0) const;
};

struct TimescaleReport {
  double tau_p = 0.0;
  double tau_x = std::numeric_limits<double>::infinity();
  bool overdamped = false;
  /// tau_x came from position autocorrelation rather than a closed form.
  bool tau_x_estimated = false;
};

/// Overdamped iff tau_x >= kOverdampedRatio * tau_p.
inline constexpr double kOverdampedRatio = 100.0;

/// tau_p = m / gamma; tau_x = gamma / lambda_max(Hessian U) for quadratic
/// potentials (infinite when unconfined), otherwise the 1/e decay time of the
/// position autocorrelation of a short overdamped run.
TimescaleReport timescale_report(const LangevinConfig& config, unsigned threads = 0);

/// dx = p/m dt, dp = (-dU - gamma p/m) dt + sqrt(2 gamma T) dW.
/// Requires dt <= tau_p / 20.
TrajectoryEnsemble integrate_underdamped(const LangevinConfig& config, unsigned threads = 0);

/// dx = -dU/gamma dt + sqrt(2 T/gamma) dW. For quadratic potentials requires
/// dt <= 1e-3 tau_x and dt < 2 gamma / lambda_max.
TrajectoryEnsemble integrate_overdamped(const LangevinConfig& config, unsigned threads = 0);

const char* integrator_name(Integrator integrator);

}  // namespace bildsim::brownian
