#include "bildsim/brownian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "bildsim/errors.hpp"
#include "bildsim/rng.hpp"

namespace bildsim::brownian {
namespace {

constexpr double kMaxStoredValues = 3.0e8;

std::string str(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void require(bool ok, const std::string& message, const std::string& field) {
  if (!ok) throw ValidationError(message, field);
}

class Fnv1a {
 public:
  void add_bytes(const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= bytes[i];
      state_ *= 0x100000001B3ull;
    }
  }
  void add(double v) { add_bytes(&v, sizeof v); }
  void add(std::uint64_t v) { add_bytes(&v, sizeof v); }
  void add(const std::vector<double>& v) {
    add(static_cast<std::uint64_t>(v.size()));
    for (double x : v) add(x);
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xCBF29CE484222325ull;
};

double lambda_max(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

/// Closed-form tau_x, or nullopt when the potential is not quadratic.
std::optional<double> analytic_tau_x(const LangevinConfig& c) {
  const auto h = c.potential.hessian();
  if (!h) return std::nullopt;
  const double top = lambda_max(*h);
  if (top <= 0.0) return std::numeric_limits<double>::infinity();
  return c.gamma() / top;
}

struct InitialState {
  std::vector<double> x;
  std::vector<double> p;
};

InitialState draw_initial(const LangevinConfig& c, std::size_t traj, bool with_momenta) {
  const std::size_t n = c.n_particles;
  rng::CounterStream stream(c.seed, rng::Domain::brownian_initial, traj);
  InitialState s{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const auto& ic = c.initial;
  auto stationary_momenta = [&] {
    for (std::size_t i = 0; i < n; ++i) s.p[i] = std::sqrt(c.mass * c.temperature(i)) * stream.normal();
  };
  switch (ic.kind) {
    case InitialCondition::Kind::point:
      if (!ic.x0.empty()) s.x = ic.x0;
      if (with_momenta && !ic.p0.empty()) s.p = ic.p0;
      break;
    case InitialCondition::Kind::uniform:
      for (std::size_t i = 0; i < n; ++i) s.x[i] = ic.low + (ic.high - ic.low) * stream.uniform();
      if (with_momenta) stationary_momenta();
      break;
    case InitialCondition::Kind::stationary: {
      if (!ic.x0.empty()) s.x = ic.x0;
      const auto h = *c.potential.hessian();  // checked in validate()
      if (c.potential.coupling() == 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
          const double k = h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
          if (k > 0.0) s.x[i] = std::sqrt(c.temperature(i) / k) * stream.normal();
        }
      } else {
        const Eigen::MatrixXd cov = c.temperature(0) * h.inverse();
        const Eigen::MatrixXd l = cov.llt().matrixL();
        Eigen::VectorXd z(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = stream.normal();
        const Eigen::VectorXd x = l * z;
        for (std::size_t i = 0; i < n; ++i) s.x[i] = x(static_cast<Eigen::Index>(i));
      }
      if (with_momenta) stationary_momenta();
      break;
    }
  }
  return s;
}

TrajectoryEnsemble allocate(const LangevinConfig& c, bool with_momenta) {
  const std::size_t steps = c.n_steps();
  const std::size_t snaps = steps / c.record_stride + 1;
  const double stored = static_cast<double>(c.n_trajectories) * static_cast<double>(snaps) *
                        static_cast<double>(c.n_particles) * (with_momenta ? 2.0 : 1.0);
  require(stored <= kMaxStoredValues,
          "ensemble would store " + str(stored) + " values; increase record_stride or reduce "
          "n_trajectories",
          "record_stride");
  TrajectoryEnsemble e;
  e.n_trajectories = c.n_trajectories;
  e.n_particles = c.n_particles;
  e.dt = c.dt;
  e.record_stride = c.record_stride;
  e.seed = c.seed;
  e.config_hash = c.hash();
  e.times.resize(snaps);
  for (std::size_t s = 0; s < snaps; ++s) {
    e.times[s] = static_cast<double>(s * c.record_stride) * c.dt;
  }
  e.positions.assign(c.n_trajectories * snaps * c.n_particles, 0.0);
  if (with_momenta) e.momenta.assign(e.positions.size(), 0.0);
  return e;
}

[[noreturn]] void blow_up(std::size_t traj, double t, std::span<const double> x,
                          std::span<const double> p) {
  std::string state = "x=[";
  for (std::size_t i = 0; i < x.size(); ++i) state += (i ? "," : "") + str(x[i]);
  state += "]";
  if (!p.empty()) {
    state += " p=[";
    for (std::size_t i = 0; i < p.size(); ++i) state += (i ? "," : "") + str(p[i]);
    state += "]";
  }
  throw NumericalError("trajectory " + std::to_string(traj) + " became non-finite by t=" +
                       str(t) + " (" + state + "); reduce dt");
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

template <bool Underdamped>
TrajectoryEnsemble integrate(const LangevinConfig& c, unsigned threads) {
  TrajectoryEnsemble e = allocate(c, Underdamped);
  const std::size_t n = c.n_particles;
  const std::size_t steps = c.n_steps();
  const std::size_t snaps = e.n_snapshots();
  const double gamma = c.gamma();
  const double dt = c.dt;

  std::vector<double> kick(n);
  for (std::size_t i = 0; i < n; ++i) {
    if constexpr (Underdamped) {
      kick[i] = c.integrator == Integrator::exponential_euler
                    ? std::sqrt(c.mass * c.temperature(i) *
                                (1.0 - std::exp(-2.0 * dt / c.tau_p())))
                    : std::sqrt(2.0 * gamma * c.temperature(i) * dt);
    } else {
      kick[i] = std::sqrt(2.0 * c.diffusion(i) * dt);
    }
  }
  const double decay = std::exp(-dt / c.tau_p());

  rng::parallel_for(c.n_trajectories, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> force(n);
    for (std::size_t traj = begin; traj < end; ++traj) {
      InitialState state = draw_initial(c, traj, Underdamped);
      auto& x = state.x;
      auto& p = state.p;
      rng::CounterStream noise(c.seed, rng::Domain::brownian_noise, traj);
      auto record = [&](std::size_t snap) {
        if (!all_finite(x) || (Underdamped && !all_finite(p))) {
          blow_up(traj, e.times[snap], x, Underdamped ? std::span<const double>(p)
                                                      : std::span<const double>());
        }
        std::copy(x.begin(), x.end(), e.positions.begin() + static_cast<std::ptrdiff_t>(e.offset(traj, snap)));
        if constexpr (Underdamped) {
          std::copy(p.begin(), p.end(), e.momenta.begin() + static_cast<std::ptrdiff_t>(e.offset(traj, snap)));
        }
      };
      record(0);
      std::size_t snap = 1;
      for (std::size_t step = 1; step <= steps; ++step) {
        c.potential.force(x, force);
        for (std::size_t i = 0; i < n; ++i) {
          if constexpr (Underdamped) {
            const double xi = noise.normal();
            x[i] += p[i] / c.mass * dt;
            if (c.integrator == Integrator::exponential_euler) {
              p[i] = decay * p[i] + (1.0 - decay) * c.tau_p() * force[i] + kick[i] * xi;
            } else {
              p[i] += (force[i] - gamma * p[i] / c.mass) * dt + kick[i] * xi;
            }
          } else {
            x[i] += force[i] / gamma * dt + kick[i] * noise.normal();
          }
        }
        if (step % c.record_stride == 0 && snap < snaps) record(snap++);
      }
    }
  });
  return e;
}

}  // namespace

Potential::Potential(PotentialKind kind, std::size_t n, double coupling)
    : kind_(kind), n_particles_(n), coupling_(coupling) {
  require(n >= 1, "potential needs at least one particle", "n_particles");
  require(std::isfinite(coupling), "coupling must be finite", "potential.coupling");
}

Potential Potential::free(std::size_t n_particles, double coupling) {
  return Potential(PotentialKind::free, n_particles, coupling);
}

Potential Potential::harmonic(std::vector<double> stiffness, double coupling) {
  Potential p(PotentialKind::harmonic, stiffness.size(), coupling);
  for (double k : stiffness) {
    require(std::isfinite(k) && k >= 0.0, "harmonic stiffness must be finite and >= 0",
            "potential.stiffness");
  }
  p.stiffness_ = std::move(stiffness);
  return p;
}

Potential Potential::polynomial(std::vector<double> coefficients, std::size_t n_particles,
                                double coupling) {
  Potential p(PotentialKind::polynomial, n_particles, coupling);
  require(!coefficients.empty(), "polynomial needs coefficients", "potential.coefficients");
  for (double a : coefficients) {
    require(std::isfinite(a), "polynomial coefficients must be finite", "potential.coefficients");
  }
  p.coefficients_ = std::move(coefficients);
  return p;
}

double Potential::energy(std::span<const double> x) const {
  double u = 0.0;
  for (std::size_t i = 0; i < n_particles_; ++i) {
    switch (kind_) {
      case PotentialKind::free: break;
      case PotentialKind::harmonic: u += 0.5 * stiffness_[i] * x[i] * x[i]; break;
      case PotentialKind::polynomial: {
        double term = 0.0;
        for (auto c = coefficients_.rbegin(); c != coefficients_.rend(); ++c) term = term * x[i] + *c;
        u += term;
        break;
      }
    }
  }
  if (coupling_ != 0.0) {
    for (std::size_t i = 0; i < n_particles_; ++i)
      for (std::size_t j = i + 1; j < n_particles_; ++j) u += 0.5 * coupling_ * (x[i] - x[j]) * (x[i] - x[j]);
  }
  return u;
}

void Potential::force(std::span<const double> x, std::span<double> out) const {
  double total = 0.0;
  if (coupling_ != 0.0) {
    for (std::size_t i = 0; i < n_particles_; ++i) total += x[i];
  }
  for (std::size_t i = 0; i < n_particles_; ++i) {
    double f = 0.0;
    switch (kind_) {
      case PotentialKind::free: break;
      case PotentialKind::harmonic: f = -stiffness_[i] * x[i]; break;
      case PotentialKind::polynomial: {
        double derivative = 0.0;
        for (std::size_t k = coefficients_.size() - 1; k >= 1; --k) {
          derivative = derivative * x[i] + static_cast<double>(k) * coefficients_[k];
        }
        f = -derivative;
        break;
      }
    }
    // -d/dx_i (c/2) sum_{j<l} (x_j - x_l)^2 = -c (N x_i - sum_j x_j)
    if (coupling_ != 0.0) f -= coupling_ * (static_cast<double>(n_particles_) * x[i] - total);
    out[i] = f;
  }
}

std::optional<Eigen::MatrixXd> Potential::hessian() const {
  if (kind_ == PotentialKind::polynomial) return std::nullopt;
  const auto n = static_cast<Eigen::Index>(n_particles_);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  if (kind_ == PotentialKind::harmonic) {
    for (Eigen::Index i = 0; i < n; ++i) h(i, i) = stiffness_[static_cast<std::size_t>(i)];
  }
  if (coupling_ != 0.0) {
    h += coupling_ * (static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n) -
                      Eigen::MatrixXd::Ones(n, n));
  }
  return h;
}

double LangevinConfig::temperature(std::size_t particle) const {
  return temperatures.size() == 1 ? temperatures.front() : temperatures.at(particle);
}

std::size_t LangevinConfig::n_steps() const {
  const auto raw = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const std::size_t steps = std::max<std::size_t>(raw, 1);
  return (steps + record_stride - 1) / record_stride * record_stride;
}

void LangevinConfig::validate() const {
  require(n_particles >= 1, "n_particles must be >= 1", "n_particles");
  require(potential.n_particles() == n_particles,
          "potential is defined for " + std::to_string(potential.n_particles()) +
              " particles, config has " + std::to_string(n_particles),
          "potential");
  require(std::isfinite(mass) && mass > 0.0, "mass must be positive", "mass");
  require(std::isfinite(friction) && friction > 0.0, "friction must be positive", "friction");
  require(std::isfinite(dt) && dt > 0.0, "dt must be positive", "dt");
  require(std::isfinite(t_end) && t_end > 0.0, "t_end must be positive", "t_end");
  require(temperatures.size() == 1 || temperatures.size() == n_particles,
          "temperatures needs 1 or n_particles entries", "temperatures");
  for (double t : temperatures) {
    require(std::isfinite(t) && t >= 0.0, "temperatures must be finite and >= 0", "temperatures");
  }
  require(n_trajectories >= 1, "n_trajectories must be >= 1", "n_trajectories");
  require(record_stride >= 1, "record_stride must be >= 1", "record_stride");
  require(initial.x0.empty() || initial.x0.size() == n_particles,
          "initial.x0 needs n_particles entries", "initial.x0");
  require(initial.p0.empty() || initial.p0.size() == n_particles,
          "initial.p0 needs n_particles entries", "initial.p0");
  for (double v : initial.x0) require(std::isfinite(v), "initial.x0 must be finite", "initial.x0");
  for (double v : initial.p0) require(std::isfinite(v), "initial.p0 must be finite", "initial.p0");
  if (initial.kind == InitialCondition::Kind::uniform) {
    require(std::isfinite(initial.low) && std::isfinite(initial.high) && initial.low < initial.high,
            "uniform start needs finite low < high", "initial");
  }
  if (initial.kind == InitialCondition::Kind::stationary) {
    const auto h = potential.hessian();
    require(h.has_value(), "stationary start needs a free or harmonic potential", "initial");
    if (potential.coupling() != 0.0) {
      bool equal = true;
      for (std::size_t i = 1; i < n_particles; ++i) equal = equal && temperature(i) == temperature(0);
      require(equal, "stationary start of coupled particles needs equal temperatures", "initial");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(*h, Eigen::EigenvaluesOnly);
      require(solver.eigenvalues().minCoeff() > 0.0,
              "stationary start of coupled particles needs a confining potential", "initial");
    }
  }
}

std::uint64_t LangevinConfig::hash() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(n_particles));
  h.add(mass);
  h.add(friction);
  h.add(temperatures);
  h.add(static_cast<std::uint64_t>(potential.kind()));
  h.add(potential.stiffness());
  h.add(potential.coefficients());
  h.add(potential.coupling());
  h.add(dt);
  h.add(t_end);
  h.add(static_cast<std::uint64_t>(n_trajectories));
  h.add(seed);
  h.add(static_cast<std::uint64_t>(paper_units));
  h.add(static_cast<std::uint64_t>(initial.kind));
  h.add(initial.x0);
  h.add(initial.p0);
  h.add(initial.low);
  h.add(initial.high);
  h.add(static_cast<std::uint64_t>(record_stride));
  h.add(static_cast<std::uint64_t>(integrator));
  return h.value();
}

std::vector<double> TrajectoryEnsemble::positions_at(std::size_t snap, std::size_t particle) const {
  std::vector<double> out(n_trajectories);
  for (std::size_t k = 0; k < n_trajectories; ++k) out[k] = x(k, snap, particle);
  return out;
}

std::vector<double> TrajectoryEnsemble::momenta_at(std::size_t snap, std::size_t particle) const {
  std::vector<double> out(n_trajectories);
  for (std::size_t k = 0; k < n_trajectories; ++k) out[k] = p(k, snap, particle);
  return out;
}

TimescaleReport timescale_report(const LangevinConfig& config, unsigned threads) {
  config.validate();
  TimescaleReport report;
  report.tau_p = config.tau_p();
  if (const auto tau = analytic_tau_x(config)) {
    report.tau_x = *tau;
  } else {
    // Position autocorrelation of an overdamped run after a burn-in of half
    // the horizon; tau_x is where it first drops below 1/e.
    LangevinConfig probe = config;
    probe.n_trajectories = std::min<std::size_t>(config.n_trajectories, 2000);
    probe.record_stride = std::max<std::size_t>(1, config.n_steps() / 200);
    probe.t_end = std::max(config.t_end, 2.0 * probe.dt * static_cast<double>(probe.record_stride));
    const auto e = integrate_overdamped(probe, threads);
    const std::size_t origin = e.n_snapshots() / 2;
    const auto x0 = e.positions_at(origin);
    double mean0 = 0.0;
    for (double v : x0) mean0 += v;
    mean0 /= static_cast<double>(x0.size());
    double var0 = 0.0;
    for (double v : x0) var0 += (v - mean0) * (v - mean0);
    report.tau_x_estimated = true;
    double previous = 1.0;
    for (std::size_t s = origin + 1; s < e.n_snapshots() && var0 > 0.0; ++s) {
      const auto xs = e.positions_at(s);
      double mean = 0.0;
      for (double v : xs) mean += v;
      mean /= static_cast<double>(xs.size());
      double cov = 0.0;
      for (std::size_t k = 0; k < xs.size(); ++k) cov += (x0[k] - mean0) * (xs[k] - mean);
      const double rho = cov / var0;
      if (rho < std::exp(-1.0)) {
        const double t_prev = e.times[s - 1] - e.times[origin];
        const double t_here = e.times[s] - e.times[origin];
        const double frac = (previous - std::exp(-1.0)) / (previous - rho);
        report.tau_x = t_prev + frac * (t_here - t_prev);
        break;
      }
      previous = rho;
    }
  }
  report.overdamped = report.tau_x >= kOverdampedRatio * report.tau_p;
  return report;
}

TrajectoryEnsemble integrate_underdamped(const LangevinConfig& config, unsigned threads) {
  config.validate();
  const double limit = config.tau_p() / 20.0;
  require(config.dt <= limit * (1.0 + 1e-12),
          "dt=" + str(config.dt) + " exceeds tau_p/20=" + str(limit) + " for the underdamped run",
          "dt");
  return integrate<true>(config, threads);
}

TrajectoryEnsemble integrate_overdamped(const LangevinConfig& config, unsigned threads) {
  config.validate();
  if (const auto h = config.potential.hessian()) {
    const double top = lambda_max(*h);
    if (top > 0.0) {
      const double tau_x = config.gamma() / top;
      require(config.dt <= 1e-3 * tau_x * (1.0 + 1e-12),
              "dt=" + str(config.dt) + " exceeds 1e-3 tau_x=" + str(1e-3 * tau_x), "dt");
      require(config.dt < 2.0 * config.gamma() / top,
              "dt=" + str(config.dt) + " violates the stability bound 2 gamma/k", "dt");
    }
  }
  return integrate<false>(config, threads);
}

const char* integrator_name(Integrator integrator) {
  return integrator == Integrator::exponential_euler ? "exponential_euler" : "euler_maruyama";
}

}  // namespace bildsim::brownian
