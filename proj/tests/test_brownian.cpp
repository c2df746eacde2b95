#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bildsim/brownian.hpp"
#include "bildsim/errors.hpp"
#include "bildsim/stats.hpp"

using namespace bildsim;
using namespace bildsim::brownian;

namespace {

LangevinConfig harmonic(double k, double temperature) {
  LangevinConfig c;
  c.potential = Potential::harmonic({k});
  c.temperatures = {temperature};
  c.mass = 1.0;
  c.friction = 1.0;
  c.dt = 1e-3;
  c.t_end = 1.0;
  c.n_trajectories = 1000;
  c.seed = 3;
  return c;
}

double sample_variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m += a;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double a : v) s += (a - m) * (a - m);
  return s / static_cast<double>(v.size() - 1);
}

double second_moment(const std::vector<double>& v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST(Potential, ForceMatchesFiniteDifferences) {
  const std::vector<Potential> cases{
      Potential::harmonic({1.0, 2.5, 0.3}, 0.7),
      Potential::polynomial({0.0, 0.2, -1.0, 0.1, 0.25}, 3, 0.4),
      Potential::free(3, 1.5),
  };
  const std::vector<double> x{0.3, -1.2, 0.8};
  const double h = 1e-5;
  for (const auto& u : cases) {
    std::vector<double> f(3);
    u.force(x, f);
    for (std::size_t i = 0; i < 3; ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = -(u.energy(xp) - u.energy(xm)) / (2.0 * h);
      EXPECT_NEAR(f[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Timescales, ExamplesFromClosedForm) {
  auto c = harmonic(1.0, 1.0);
  c.friction = 100.0;
  auto r = timescale_report(c, 1);
  EXPECT_DOUBLE_EQ(r.tau_p, 0.01);
  EXPECT_DOUBLE_EQ(r.tau_x, 100.0);
  EXPECT_TRUE(r.overdamped);
  EXPECT_FALSE(r.tau_x_estimated);

  r = timescale_report(harmonic(1.0, 1.0), 1);
  EXPECT_DOUBLE_EQ(r.tau_p, 1.0);
  EXPECT_DOUBLE_EQ(r.tau_x, 1.0);
  EXPECT_FALSE(r.overdamped);

  auto free = harmonic(1.0, 1.0);
  free.potential = Potential::free(1);
  r = timescale_report(free, 1);
  EXPECT_TRUE(std::isinf(r.tau_x));
  EXPECT_TRUE(r.overdamped);
}

TEST(Timescales, PaperUnitsFixFriction) {
  auto c = harmonic(2.0, 1.0);
  c.friction = 50.0;
  c.paper_units = true;
  EXPECT_DOUBLE_EQ(c.gamma(), 1.0);
  EXPECT_DOUBLE_EQ(timescale_report(c, 1).tau_x, 0.5);
}

TEST(Overdamped, ZeroTemperatureDecay) {
  auto c = harmonic(1.0, 0.0);
  c.initial.x0 = {1.0};
  c.n_trajectories = 4;
  c.record_stride = 100;
  const auto e = integrate_overdamped(c, 1);
  ASSERT_NEAR(e.times.back(), 1.0, 1e-12);
  for (std::size_t s = 0; s < e.n_snapshots(); ++s) {
    EXPECT_NEAR(e.x(0, s), std::exp(-e.times[s]), 0.01 * std::exp(-e.times[s]));
  }
}

TEST(Overdamped, FreeDiffusionSpreadsLinearly) {
  auto c = harmonic(1.0, 0.5);
  c.potential = Potential::free(1);
  c.initial.x0 = {0.7};
  c.n_trajectories = 20000;
  c.record_stride = 250;
  const auto e = integrate_overdamped(c, 1);
  for (std::size_t s = 1; s < e.n_snapshots(); ++s) {
    const double expected = 0.49 + 2.0 * 0.5 * e.times[s];
    const auto xs = e.positions_at(s);
    // Var of x^2 for a Gaussian with mean mu and variance v is 2v^2 + 4mu^2 v.
    const double v = 2.0 * 0.5 * e.times[s];
    const double se = std::sqrt((2 * v * v + 4 * 0.49 * v) / static_cast<double>(xs.size()));
    EXPECT_NEAR(second_moment(xs), expected, 3.0 * se);
  }
}

TEST(Overdamped, StationaryVarianceIsTemperatureOverStiffness) {
  auto c = harmonic(2.0, 0.8);
  c.initial.x0 = {1.5};
  c.dt = 5e-4;
  c.t_end = 4.0;
  c.n_trajectories = 20000;
  c.record_stride = 8000;
  const auto e = integrate_overdamped(c, 1);
  const double v = sample_variance(e.positions_at(e.n_snapshots() - 1));
  const double expected = 0.4;
  EXPECT_NEAR(v, expected, 3.0 * expected * std::sqrt(2.0 / 20000.0));
}

TEST(Underdamped, EquipartitionFromRest) {
  auto c = harmonic(1.0, 1.0);
  c.potential = Potential::free(1);
  c.t_end = 5.0;  // 5 tau_p
  c.n_trajectories = 20000;
  c.record_stride = 5000;
  const auto e = integrate_underdamped(c, 1);
  ASSERT_TRUE(e.has_momenta());
  const double sigma = std::sqrt(2.0 / 20000.0);
  EXPECT_NEAR(second_moment(e.momenta_at(e.n_snapshots() - 1)) / (c.mass * 1.0), 1.0, 3.0 * sigma);
}

TEST(Underdamped, GibbsPositionVariance) {
  auto c = harmonic(1.0, 1.0);
  c.t_end = 10.0;
  c.n_trajectories = 10000;
  c.record_stride = 10000;
  const auto e = integrate_underdamped(c, 1);
  const double sigma = std::sqrt(2.0 / 10000.0);
  EXPECT_NEAR(second_moment(e.positions_at(e.n_snapshots() - 1)), 1.0, 3.0 * sigma);
}

TEST(Underdamped, ZeroTemperatureMomentumDecay) {
  auto c = harmonic(1.0, 0.0);
  c.potential = Potential::free(1);
  c.friction = 2.0;
  c.initial.p0 = {1.5};
  c.t_end = 0.5;  // tau_p
  c.n_trajectories = 2;
  c.record_stride = 500;
  const auto e = integrate_underdamped(c, 1);
  EXPECT_NEAR(e.p(0, e.n_snapshots() - 1), 1.5 * std::exp(-1.0), 0.01 * 1.5 * std::exp(-1.0));
}

TEST(TwoLevels, OverdampedLimitMatchesUnderdamped) {
  // gamma / sqrt(k m) = 31.6: position statistics of both models agree.
  auto c = harmonic(1.0, 1.0);
  c.mass = 1e-3;
  c.initial.x0 = {1.0};
  c.t_end = 0.5;
  c.n_trajectories = 10000;
  c.dt = 5e-5;
  c.record_stride = 10000;
  const auto under = integrate_underdamped(c, 1);
  c.dt = 5e-4;
  c.record_stride = 1000;
  const auto over = integrate_overdamped(c, 1);
  const auto xu = under.positions_at(under.n_snapshots() - 1);
  const auto xo = over.positions_at(over.n_snapshots() - 1);
  const double vu = sample_variance(xu), vo = sample_variance(xo);
  const double sigma = std::sqrt(2.0 / 10000.0) * std::hypot(vu, vo);
  EXPECT_NEAR(vu, vo, 3.0 * sigma);
  EXPECT_NEAR(vo, 1.0 - std::exp(-1.0), 3.0 * std::sqrt(2.0 / 10000.0) * vo);

  // Stationary variance, both levels.
  c.initial.kind = InitialCondition::Kind::stationary;
  c.dt = 5e-5;
  c.record_stride = 10000;
  const double su = sample_variance(integrate_underdamped(c, 1).positions_at(1));
  c.dt = 5e-4;
  c.record_stride = 1000;
  const double so = sample_variance(integrate_overdamped(c, 1).positions_at(1));
  EXPECT_NEAR(su, so, 3.0 * std::sqrt(2.0 / 10000.0) * std::hypot(su, so));
}

TEST(Underdamped, FreeVelocityRelaxes) {
  // <p(t)> = p0 exp(-t/tau_p) without a potential.
  auto c = harmonic(1.0, 0.2);
  c.potential = Potential::free(1);
  c.friction = 2.0;
  c.initial.p0 = {1.0};
  c.n_trajectories = 20000;
  c.record_stride = 500;
  const auto e = integrate_underdamped(c, 1);
  for (std::size_t s = 0; s < e.n_snapshots(); ++s) {
    const auto p = e.momenta_at(s);
    double m = 0.0;
    for (double a : p) m += a;
    m /= static_cast<double>(p.size());
    const double sd = std::sqrt(0.2 * (1.0 - std::exp(-4.0 * e.times[s])));
    EXPECT_NEAR(m, std::exp(-2.0 * e.times[s]), 5.0 * sd / std::sqrt(20000.0) + 0.005);
  }
}

TEST(Overdamped, StationaryStartPassesKs) {
  auto c = harmonic(1.0, 1.0);
  c.initial.kind = InitialCondition::Kind::stationary;
  c.n_trajectories = 100000;
  c.record_stride = 1000;
  const auto e = integrate_overdamped(c, 1);
  const auto ks = stats::ks_test_normal(e.positions_at(e.n_snapshots() - 1), 0.0, 1.0);
  EXPECT_GT(ks.p_value, 0.01) << "D = " << ks.statistic;
}

TEST(Integrators, ExponentialEulerMatchesStationaryVariance) {
  auto c = harmonic(1.0, 1.0);
  c.integrator = Integrator::exponential_euler;
  c.initial.kind = InitialCondition::Kind::stationary;
  c.n_trajectories = 20000;
  c.record_stride = 1000;
  const auto e = integrate_overdamped(c, 1);
  EXPECT_NEAR(sample_variance(e.positions_at(1)), 1.0, 5.0 * std::sqrt(2.0 / 20000.0) + 0.005);
}

TEST(Validation, StepSizeLimits) {
  auto c = harmonic(1.0, 1.0);
  c.dt = 0.1;  // tau_p / 20 = 0.05
  try {
    integrate_underdamped(c, 1);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "dt");
  }
  c.dt = 2e-3;  // 1e-3 tau_x = 1e-3
  EXPECT_THROW(integrate_overdamped(c, 1), ValidationError);
}

TEST(Validation, NamesTheField) {
  auto c = harmonic(1.0, 1.0);
  c.dt = -1e-3;
  try {
    c.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "dt");
  }
  c = harmonic(1.0, 1.0);
  c.temperatures = {-1.0};
  try {
    c.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "temperatures");
  }
  EXPECT_THROW(Potential::harmonic({-1.0}), ValidationError);
}

TEST(Numerics, BlowUpIsReported) {
  auto c = harmonic(1.0, 0.0);
  c.potential = Potential::polynomial({0.0, 0.0, 0.0, 0.0, 1.0}, 1);
  c.initial.x0 = {10.0};
  c.dt = 0.1;
  c.t_end = 10.0;
  c.n_trajectories = 1;
  EXPECT_THROW(integrate_overdamped(c, 1), NumericalError);
}

TEST(Determinism, IndependentOfThreadCount) {
  auto c = harmonic(1.0, 1.0);
  c.n_trajectories = 257;
  c.record_stride = 50;
  const auto a = integrate_underdamped(c, 1);
  const auto b = integrate_underdamped(c, 5);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_EQ(a.momenta, b.momenta);
  c.dt = 1e-3;
  const auto oa = integrate_overdamped(c, 1);
  const auto ob = integrate_overdamped(c, 3);
  EXPECT_EQ(oa.positions, ob.positions);
}
