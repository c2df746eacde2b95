#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bildsim/brownian.hpp"
#include "bildsim/errors.hpp"
#include "bildsim/velocity.hpp"

using namespace bildsim;
using namespace bildsim::velocity;
using brownian::InitialCondition;
using brownian::LangevinConfig;
using brownian::Potential;

namespace {

LangevinConfig overdamped(Potential u, double temperature, InitialCondition ic, std::size_t n) {
  LangevinConfig c;
  c.potential = std::move(u);
  c.temperatures = {temperature};
  c.dt = 1e-3;
  c.t_end = 1.0;
  c.n_trajectories = n;
  c.seed = 17;
  c.record_stride = 10;
  c.initial = std::move(ic);
  return c;
}

InitialCondition uniform(double lo, double hi) {
  InitialCondition ic;
  ic.kind = InitialCondition::Kind::uniform;
  ic.low = lo;
  ic.high = hi;
  return ic;
}

VelocityOptions bins(double lo, double hi, std::size_t count, std::size_t min_occupancy = 200) {
  VelocityOptions o;
  o.bins.lo = lo;
  o.bins.hi = hi;
  o.bins.count = count;
  o.bins.min_occupancy = min_occupancy;
  return o;
}

std::size_t present_bins(const VelocityFieldEstimate& v) {
  std::size_t n = 0;
  for (const auto& b : v.bins) n += b.present;
  return n;
}

}  // namespace

TEST(Velocity, DeterministicRelaxationHasEqualForwardAndBackward) {
  // At T = 0 every path is x(t) = x(0) c^(t/dt) with c = 1 - dt, so both
  // conditional increments are linear in x and exact per bin.
  const auto c = overdamped(Potential::harmonic({1.0}), 0.0, uniform(-1.0, 1.0), 4000);
  const auto e = brownian::integrate_overdamped(c, 1);
  const double eps = 0.01;
  const auto opts = bins(-0.5, 0.5, 10, 50);
  const auto vp = coarse_velocity_forward(e, eps, opts);
  const auto vm = coarse_velocity_backward(e, eps, opts);
  const auto u = osmotic_velocity(vp, vm);
  const double ratio = std::pow(1.0 - c.dt, 10.0);
  ASSERT_EQ(present_bins(vp), 10u);
  for (std::size_t i = 0; i < vp.bins.size(); ++i) {
    const double x = vp.bins[i].mean_position;
    EXPECT_NEAR(vp.bins[i].value, x * (ratio - 1.0) / eps, 1e-10);
    EXPECT_NEAR(vm.bins[i].value, x * (1.0 - 1.0 / ratio) / eps, 1e-10);
    EXPECT_NEAR(vp.bins[i].value, -x, 0.01 * std::abs(x) + 1e-12);
    EXPECT_LE(std::abs(u.bins[i].value), eps * std::abs(x));
  }
}

TEST(Velocity, ZeroTemperatureWitnessVanishes) {
  const auto c = overdamped(Potential::harmonic({1.0}), 0.0, uniform(-2.0, 2.0), 4000);
  const auto e = brownian::integrate_overdamped(c, 1);
  const std::vector<double> eps{0.02, 0.04, 0.08};
  const auto rows = nonsmoothness_witness(e, eps, 0.9, 1.1);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_LT(rows[k].gap, 1.2 * eps[k]);
    if (k > 0) EXPECT_LT(rows[k - 1].gap, rows[k].gap);
  }
}

TEST(Velocity, FreeDiffusionBackwardVelocityPointsAwayFromOrigin) {
  // Brownian motion from 0: E[x(t) - x(t-eps) | x(t)] = x eps / t.
  const auto c = overdamped(Potential::free(1), 1.0, InitialCondition{}, 20000);
  const auto e = brownian::integrate_overdamped(c, 1);
  auto opts = bins(-2.0, 2.0, 8);
  opts.at_time = 0.8;
  const auto vm = coarse_velocity_backward(e, 0.05, opts);
  std::size_t checked = 0;
  for (const auto& b : vm.bins) {
    if (!b.present) continue;
    ++checked;
    EXPECT_NEAR(b.value, b.mean_position / 0.8, 5.0 * b.std_error);
    if (b.mean_position > 0.3) EXPECT_GT(b.value, 0.0);
  }
  EXPECT_GE(checked, 6u);
}

TEST(Velocity, UniformFreeStartHasNoForwardDrift) {
  const auto c = overdamped(Potential::free(1), 0.5, uniform(-1.0, 1.0), 5000);
  const auto e = brownian::integrate_overdamped(c, 1);
  const auto vp = coarse_velocity_forward(e, 0.05, bins(-1.0, 1.0, 5));
  for (const auto& b : vp.bins) {
    ASSERT_TRUE(b.present);
    EXPECT_NEAR(b.value, 0.0, 5.0 * b.std_error);
  }
}

TEST(Velocity, OsmoticSignConvention) {
  // Stationary OU with D = k = 1: u = (v- - v+)/2 = x (1 - e^-eps)/eps, which
  // equals -D d ln P = x as eps -> 0 and points outward.
  InitialCondition ic;
  ic.kind = InitialCondition::Kind::stationary;
  const auto c = overdamped(Potential::harmonic({1.0}), 1.0, ic, 10000);
  const auto e = brownian::integrate_overdamped(c, 1);
  const double eps = 0.02;
  const auto opts = bins(-1.5, 1.5, 6);
  const auto u = osmotic_velocity(coarse_velocity_forward(e, eps, opts),
                                  coarse_velocity_backward(e, eps, opts));
  EXPECT_EQ(u.kind, VelocityKind::osmotic);
  const auto ref = kde_osmotic_reference(e, u, 1.0, opts);
  ASSERT_EQ(ref.size(), u.bins.size());
  for (std::size_t i = 0; i < u.bins.size(); ++i) {
    const auto& b = u.bins[i];
    ASSERT_TRUE(b.present);
    const double exact = b.mean_position * (1.0 - std::exp(-eps)) / eps;
    EXPECT_NEAR(b.value, exact, 5.0 * b.std_error);
    EXPECT_EQ(b.value > 0.0, b.mean_position > 0.0);
    ASSERT_TRUE(ref[i].present);
    EXPECT_NEAR(ref[i].value, b.mean_position, 5.0 * ref[i].std_error + 0.1 * std::abs(b.mean_position));
  }
}

TEST(Velocity, SparseBinsAreAbsent) {
  const auto c = overdamped(Potential::harmonic({1.0}), 0.0, uniform(-1.0, 1.0), 500);
  const auto e = brownian::integrate_overdamped(c, 1);
  const auto vp = coarse_velocity_forward(e, 0.01, bins(2.0, 3.0, 4));
  for (const auto& b : vp.bins) {
    EXPECT_FALSE(b.present);
    EXPECT_TRUE(std::isnan(b.value));
    EXPECT_TRUE(std::isnan(b.std_error));
  }
  EXPECT_EQ(vp.bin_at(2.1), &vp.bins[0]);
  EXPECT_EQ(vp.bin_at(5.0), nullptr);
}

TEST(Velocity, IncrementValidation) {
  const auto c = overdamped(Potential::harmonic({1.0}), 1.0, uniform(-1.0, 1.0), 100);
  const auto e = brownian::integrate_overdamped(c, 1);
  EXPECT_THROW(epsilon_lag(e, 1e-3), ValidationError);    // < 2 dt
  EXPECT_THROW(epsilon_lag(e, 0.015), ValidationError);   // not a multiple of 0.01
  EXPECT_EQ(epsilon_lag(e, 0.03), 3u);
  const auto a = coarse_velocity_forward(e, 0.02, bins(-1.0, 1.0, 4, 2));
  const auto b = coarse_velocity_backward(e, 0.02, bins(-1.0, 1.0, 5, 2));
  EXPECT_THROW(osmotic_velocity(a, b), ValidationError);
  EXPECT_THROW(osmotic_velocity(a, a), ValidationError);
}

TEST(Velocity, ReferenceSnapshotsRespectWindow) {
  const auto c = overdamped(Potential::harmonic({1.0}), 1.0, uniform(-1.0, 1.0), 10);
  const auto e = brownian::integrate_overdamped(c, 1);
  VelocityOptions o;
  o.skip_before = 0.5;
  const auto refs = reference_snapshots(e, 5, o);
  ASSERT_FALSE(refs.empty());
  for (std::size_t k = 0; k < refs.size(); ++k) {
    EXPECT_GE(e.times[refs[k]], 0.5 - 1e-12);
    EXPECT_GE(refs[k], 5u);
    EXPECT_LT(refs[k] + 5, e.n_snapshots());
    if (k > 0) EXPECT_EQ(refs[k] - refs[k - 1], 5u);
  }
}

class PhaseSpace : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    LangevinConfig c;
    c.potential = Potential::free(1);
    c.temperatures = {1.0};
    c.dt = 1e-3;
    c.t_end = 1.0;
    c.n_trajectories = 5000;
    c.seed = 23;
    c.initial.kind = InitialCondition::Kind::stationary;
    config_ = new LangevinConfig(c);
    ensemble_ = new brownian::TrajectoryEnsemble(brownian::integrate_underdamped(c, 1));
  }
  static void TearDownTestSuite() {
    delete ensemble_;
    delete config_;
  }
  static LangevinConfig* config_;
  static brownian::TrajectoryEnsemble* ensemble_;
};

LangevinConfig* PhaseSpace::config_ = nullptr;
brownian::TrajectoryEnsemble* PhaseSpace::ensemble_ = nullptr;

TEST_F(PhaseSpace, RefusesCoarseIncrement) {
  PhaseBin bin;
  try {
    momentum_resolution_check(*ensemble_, *config_, 0.03, bin);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "epsilon");
  }
  EXPECT_NO_THROW(momentum_resolution_check(*ensemble_, *config_, 0.02, bin));
  EXPECT_THROW(nonsmoothness_witness(*ensemble_, std::vector<double>{0.01}, -1.0, 1.0),
               ValidationError);
}

TEST_F(PhaseSpace, ZeroMomentumBinHasNoDrift) {
  const auto r = momentum_resolution_check(*ensemble_, *config_, 0.01, PhaseBin{});
  EXPECT_NEAR(r.v_plus.mean, 0.0, 5.0 * r.v_plus.std_error + 0.01);
  EXPECT_NEAR(r.v_minus.mean, 0.0, 5.0 * r.v_minus.std_error + 0.01);
}

TEST_F(PhaseSpace, DeviationFollowsRelaxationFactor) {
  // Free particle: E[x(t+eps) - x(t) | p] = (p/m) tau_p (1 - e^{-eps/tau_p}).
  PhaseBin bin;
  bin.p_lo = 0.9;
  bin.p_hi = 1.1;
  for (double eps : {0.01, 0.2, 0.5}) {
    const auto r = phase_space_velocity(*ensemble_, 1.0, 1.0, eps, bin);
    const double factor = (1.0 - std::exp(-eps)) / eps;
    EXPECT_NEAR(r.v_plus.mean, factor * r.momentum_velocity.mean, 5.0 * r.v_plus.std_error)
        << "eps=" << eps;
  }
}
