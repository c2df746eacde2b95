#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bildsim/bell.hpp"
#include "bildsim/errors.hpp"
#include "fixtures.hpp"

using namespace bildsim;
using namespace bildsim::bell;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Bell, SingletCorrelationIsMinusCosine) {
  const auto rho = singlet_state();
  for (double a : {0.0, 0.3, 1.1, -2.0}) {
    for (double b : {0.0, 0.7, -0.4, 2.9}) {
      EXPECT_NEAR(quantum_correlation(rho, a, b), -std::cos(a - b), 1e-14);
    }
  }
}

TEST(Bell, OptimalAnglesReachTwoRootTwo) {
  const double s = chsh_value(singlet_state(), ChshAngles::optimal());
  EXPECT_NEAR(std::abs(s), 2.0 * std::sqrt(2.0), 1e-14);
}

TEST(Bell, SweepFollowsClosedForm) {
  const auto rho = singlet_state();
  for (double t = -1.5; t <= 1.5; t += 0.1) {
    EXPECT_NEAR(chsh_value(rho, ChshAngles::sweep(t)), -3.0 * std::cos(t) + std::cos(3.0 * t), 1e-13);
  }
}

TEST(Bell, GridScanDoesNotExceedTsirelson) {
  const auto scan = chsh_grid_scan(singlet_state(), 13, -kPi / 2, kPi / 2);
  EXPECT_LE(scan.max_abs_s, 2.0 * std::sqrt(2.0) + 1e-12);
  EXPECT_GT(scan.max_abs_s, 2.5);
  EXPECT_THROW(chsh_grid_scan(singlet_state(), 1, 0.0, 1.0), ValidationError);
}

TEST(Bell, CompatibilityAudit) {
  const auto r = compatibility_audit(ChshAngles::optimal());
  for (double c : r.cross) EXPECT_NEAR(c, 0.0, 1e-14);
  // Orthogonal directions on the Bloch sphere: ||[sz, sx]||_F = 2 sqrt 2.
  EXPECT_NEAR(r.alice_local, 2.0 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(r.bob_local, 2.0 * std::sqrt(2.0), 1e-14);
  EXPECT_FALSE(r.degenerate);

  const auto same = compatibility_audit(ChshAngles{0.3, 0.3, 0.0, 1.0});
  EXPECT_NEAR(same.alice_local, 0.0, 1e-14);
  EXPECT_TRUE(same.degenerate);
  EXPECT_LE(std::abs(chsh_value(singlet_state(), ChshAngles{0.3, 0.3, 0.0, 1.0})), 2.0 + 1e-14);
}

TEST(Bell, DeterministicBoundIsTwo) {
  EXPECT_EQ(deterministic_bound_enumeration(), 2);
  EXPECT_EQ(deterministic_chsh({1, 1, 1, 1}), 2);
  EXPECT_EQ(deterministic_chsh({1, -1, 1, 1}), 2);
}

TEST(Bell, SphereSignCorrelationIsLinearInAngle) {
  const ChshAngles angles{0.0, 1.2, 0.5, -0.7};
  const auto strategy = HvStrategy::sphere_sign(angles);
  const std::array<std::pair<Pair, double>, 4> expected{{
      {Pair::A1B1, 1.0 - 2.0 * 0.5 / kPi},
      {Pair::A1B2, 1.0 - 2.0 * 0.7 / kPi},
      {Pair::A2B1, 1.0 - 2.0 * 0.7 / kPi},
      {Pair::A2B2, 1.0 - 2.0 * 1.9 / kPi},
  }};
  const auto stream = hv_sample(strategy, 200000, 31, 1);
  for (const auto& [pair, value] : expected) {
    EXPECT_NEAR(hv_exact_correlation(strategy, pair), value, 1e-14);
    // Products are +-1, so the standard error is at most 1/sqrt(n).
    EXPECT_NEAR(empirical_correlation(stream, pair), value, 5.0 / std::sqrt(200000.0));
  }
}

TEST(Bell, SphereSignSweepSitsOnTheBound) {
  // For 0 <= t <= pi/3 the linear correlations give S = 2 exactly.
  for (double t = 0.0; t <= kPi / 3; t += 0.05) {
    const auto strategy = HvStrategy::sphere_sign(ChshAngles::sweep(t));
    const double s = hv_exact_correlation(strategy, Pair::A1B1) +
                     hv_exact_correlation(strategy, Pair::A1B2) +
                     hv_exact_correlation(strategy, Pair::A2B1) -
                     hv_exact_correlation(strategy, Pair::A2B2);
    EXPECT_NEAR(s, 2.0, 1e-12);
  }
}

TEST(Bell, JointStreamNeverExceedsTwo) {
  auto s = fixtures::fixture_stream(41);
  for (int trial = 0; trial < 10; ++trial) {
    const ChshAngles a{kPi * (2 * s.uniform() - 1), kPi * (2 * s.uniform() - 1),
                       kPi * (2 * s.uniform() - 1), kPi * (2 * s.uniform() - 1)};
    const auto stream = hv_sample(HvStrategy::sphere_sign(a), 5000, 100 + trial, 1);
    EXPECT_LE(std::abs(chsh_from_stream(stream)), 2.0 + 1e-12);
    for (const auto& r : stream.records) EXPECT_EQ(std::abs(deterministic_chsh(r)), 2);
  }
}

TEST(Bell, ConstantAndTableStrategies) {
  const auto c = HvStrategy::constant({1, -1, 1, 1});
  const auto stream = hv_sample(c, 100, 1, 1);
  EXPECT_DOUBLE_EQ(chsh_from_stream(stream), 2.0);
  EXPECT_DOUBLE_EQ(empirical_correlation(stream, Pair::A1A2), -1.0);

  const HvStrategy table(ResponseTable{{1.0, 3.0}, {Outcomes{1, 1, 1, 1}, Outcomes{1, 1, 1, -1}}});
  // Row 0 gives A2B2 = +1, row 1 gives -1: exact 0.25 - 0.75.
  EXPECT_DOUBLE_EQ(hv_exact_correlation(table, Pair::A2B2), -0.5);
  const auto ts = hv_sample(table, 100000, 2, 1);
  EXPECT_NEAR(empirical_correlation(ts, Pair::A2B2), -0.5, 5.0 * std::sqrt(0.75 / 100000));
}

TEST(Bell, SplitStreamsAgreeWithModel) {
  const auto strategy = HvStrategy::sphere_sign(ChshAngles::optimal());
  const auto split = chsh_from_split_streams(strategy, 100000, 7, 1);
  const auto joint = chsh_estimate(hv_sample(strategy, 100000, 7, 1));
  EXPECT_NEAR(split.value, 2.0, 5.0 * split.std_error);
  EXPECT_NEAR(joint.value, 2.0, 5.0 * joint.std_error + 1e-12);
  EXPECT_GT(split.std_error, 0.0);
}

TEST(Bell, SamplingIsThreadIndependent) {
  const auto strategy = HvStrategy::sphere_sign(ChshAngles::optimal());
  EXPECT_EQ(hv_sample(strategy, 3000, 9, 1).records, hv_sample(strategy, 3000, 9, 4).records);
}

TEST(Bell, QuantumPairSampleMatchesBornRule) {
  const auto est = quantum_pair_sample(singlet_state(), 0.0, kPi / 3, 100000, 5);
  EXPECT_NEAR(est.value, -0.5, 5.0 * est.std_error);
}

TEST(Bell, StrategyValidation) {
  EXPECT_THROW(HvStrategy::constant({1, 0, 1, 1}), ValidationError);
  EXPECT_THROW(HvStrategy(ResponseTable{{0.0}, {Outcomes{1, 1, 1, 1}}}), ValidationError);
  EXPECT_THROW(HvStrategy(ResponseTable{{1.0, 1.0}, {Outcomes{1, 1, 1, 1}}}), ValidationError);
  EXPECT_THROW(HvStrategy::sphere_sign(ChshAngles{NAN, 0, 0, 0}), ValidationError);
  EXPECT_THROW(quantum_correlation(hilbert::DensityOperator(hilbert::HermitianOperator::identity(2).scaled(0.5)),
                                   0.0, 0.0),
               DimensionMismatch);
}

TEST(Bell, ObservableFamily) {
  using hilbert::Matrix;
  EXPECT_LT((observable_from_angle(0.0).matrix() - hilbert::pauli_z().matrix()).norm(), 1e-15);
  EXPECT_LT((observable_from_angle(kPi / 2).matrix() - hilbert::pauli_x().matrix()).norm(), 1e-15);
  const auto diag = observable_from_angle(kPi / 4);
  const Matrix expected = (hilbert::pauli_z().matrix() + hilbert::pauli_x().matrix()) / std::sqrt(2.0);
  EXPECT_LT((diag.matrix() - expected).norm(), 1e-15);
  const auto ev = hilbert::eigenvalues(diag);
  EXPECT_NEAR(ev(0), -1.0, 1e-14);
  EXPECT_NEAR(ev(1), 1.0, 1e-14);
}

TEST(Bell, SingletIsPure) {
  const auto rho = singlet_state();
  EXPECT_NEAR(rho.op().trace(), 1.0, 1e-15);
  EXPECT_NEAR(rho.purity(), 1.0, 1e-15);
}

TEST(Bell, CorrelationExamples) {
  auto s = fixtures::fixture_stream(42);
  const auto rho = singlet_state();
  for (int k = 0; k < 10; ++k) {
    const double a = kPi * (2 * s.uniform() - 1), b = kPi * (2 * s.uniform() - 1);
    EXPECT_NEAR(quantum_correlation(rho, a, b), -std::cos(a - b), 1e-14);
  }
  EXPECT_NEAR(quantum_correlation(rho, 0.4, 0.4), -1.0, 1e-14);
  EXPECT_NEAR(quantum_correlation(rho, 0.4, 0.4 + kPi / 2), 0.0, 1e-14);
  const hilbert::DensityOperator mixed(hilbert::HermitianOperator::identity(4).scaled(0.25));
  EXPECT_NEAR(quantum_correlation(mixed, 0.3, -1.0), 0.0, 1e-15);
  EXPECT_NEAR(chsh_value(mixed, ChshAngles::optimal()), 0.0, 1e-15);
  const hilbert::DensityOperator product(hilbert::HermitianOperator::diagonal({1.0, 0.0, 0.0, 0.0}));
  for (int k = 0; k < 20; ++k) {
    const ChshAngles a{kPi * s.uniform(), kPi * s.uniform(), kPi * s.uniform(), kPi * s.uniform()};
    EXPECT_LE(std::abs(chsh_value(product, a)), 2.0 + 1e-12);
  }
}

TEST(Bell, DegeneracyGuard) {
  auto s = fixtures::fixture_stream(43);
  const auto rho = singlet_state();
  for (int k = 0; k < 50; ++k) {
    const double t = kPi * (2 * s.uniform() - 1), u = kPi * (2 * s.uniform() - 1), v = kPi * (2 * s.uniform() - 1);
    const ChshAngles alice{t, t + kPi * (k % 3 - 1), u, v};  // a1 = a2 mod pi
    const ChshAngles bob{u, v, t, t + kPi};                  // b1 = b2 mod pi
    EXPECT_LE(std::abs(chsh_value(rho, alice)), 2.0 + 1e-9);
    EXPECT_LE(std::abs(chsh_value(rho, bob)), 2.0 + 1e-9);
    EXPECT_TRUE(compatibility_audit(alice).degenerate);
    EXPECT_NEAR(compatibility_audit(bob).bob_local, 0.0, 1e-14);
  }
}

TEST(Bell, CrossCommutatorsVanishForAnyAngles) {
  auto s = fixtures::fixture_stream(44);
  for (int k = 0; k < 20; ++k) {
    const auto r = compatibility_audit(ChshAngles{s.uniform() * 6, s.uniform() * 6, s.uniform() * 6, s.uniform() * 6});
    for (double c : r.cross) EXPECT_LT(c, 1e-12);
  }
}

TEST(Bell, ConstantPlusOneStrategy) {
  const auto c = HvStrategy::constant({1, 1, 1, 1});
  const auto stream = hv_sample(c, 500, 3, 1);
  for (const auto& r : stream.records) EXPECT_EQ(r, (Outcomes{1, 1, 1, 1}));
  for (Pair p : kAllPairs) {
    EXPECT_EQ(empirical_correlation(stream, p), 1.0);
    EXPECT_EQ(hv_exact_correlation(c, p), 1.0);
  }
  EXPECT_EQ(chsh_from_stream(stream), 2.0);
  EXPECT_EQ(deterministic_chsh({1, 1, 1, -1}), 2);
}

TEST(Bell, SphereSignExamples) {
  const std::size_t n = 1000000;
  const double tol = 5.0 / std::sqrt(static_cast<double>(n));
  // Same direction for a1 and b1: identical responses.
  auto stream = hv_sample(HvStrategy::sphere_sign(ChshAngles{0.3, 0.3, 0.3, -1.0}), 100000, 5, 1);
  EXPECT_EQ(empirical_correlation(stream, Pair::A1B1), 1.0);
  EXPECT_EQ(empirical_correlation(stream, Pair::A1A2), 1.0);
  stream = hv_sample(HvStrategy::sphere_sign(ChshAngles{0.0, kPi / 2, 0.0, 0.0}), n, 6, 1);
  EXPECT_NEAR(empirical_correlation(stream, Pair::A1A2), 0.0, tol);
  stream = hv_sample(HvStrategy::sphere_sign(ChshAngles::optimal()), n, 7, 1);
  EXPECT_LE(std::abs(chsh_from_stream(stream)), 2.01);
}

TEST(Bell, StreamCompletenessAndBound) {
  auto s = fixtures::fixture_stream(45);
  const std::size_t n = 2000;
  for (int k = 0; k < 10; ++k) {
    ResponseTable t;
    for (int r = 0; r < 5; ++r) {
      t.weights.push_back(s.uniform());
      Outcomes o{};
      for (auto& v : o) v = s.uniform() < 0.5 ? -1 : 1;
      t.rows.push_back(o);
    }
    const auto stream = hv_sample(HvStrategy(t), n, 200 + k, 1);
    for (Pair p : kAllPairs) EXPECT_TRUE(std::isfinite(empirical_correlation(stream, p)));
    EXPECT_LE(std::abs(chsh_from_stream(stream)), 2.0 + 5.0 * 4.0 / std::sqrt(static_cast<double>(n)));
  }
}
