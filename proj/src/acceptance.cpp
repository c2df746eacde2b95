#include "bildsim/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <memory>
#include <numbers>
#include <optional>

#include <fmt/format.h>

#include "bildsim/bell.hpp"
#include "bildsim/brownian.hpp"
#include "bildsim/cli.hpp"
#include "bildsim/errors.hpp"
#include "bildsim/pcsft.hpp"
#include "bildsim/rng.hpp"
#include "bildsim/stats.hpp"
#include "bildsim/velocity.hpp"

namespace bildsim::acceptance {
namespace {

using hilbert::Complex;
using hilbert::Matrix;

constexpr std::uint64_t kSeedBase = 0x5EED0000ull;

struct Outcome {
  bool passed = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Random fixtures and closed-form oracles

Matrix random_gaussian_matrix(rng::CounterStream& s, long d) {
  Matrix m(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) m(i, j) = s.circular_normal();
  return m;
}

hilbert::HermitianOperator random_hermitian(rng::CounterStream& s, long d) {
  const Matrix x = random_gaussian_matrix(s, d);
  return hilbert::HermitianOperator((x + x.adjoint()) / 2.0);
}

/// Y Y* / d with Y of shape d x rank.
hilbert::CovarianceOperator random_covariance(rng::CounterStream& s, long d, long rank) {
  Matrix y(d, rank);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < rank; ++j) y(i, j) = s.circular_normal();
  Matrix b = y * y.adjoint() / static_cast<double>(d);
  b = (b + b.adjoint()).eval() / 2.0;
  return hilbert::CovarianceOperator(hilbert::HermitianOperator(b));
}

/// Sum_ij A_ij B_ji, written out.
double trace_oracle(const Matrix& a, const Matrix& b) {
  Complex t = 0.0;
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j) t += a(i, j) * b(j, i);
  return t.real();
}

/// E[<phi|A|phi><phi|G|phi>] by pairing the four field factors explicitly.
double isserlis_oracle(const Matrix& a, const Matrix& g, const Matrix& b) {
  const long d = a.rows();
  Complex total = 0.0;
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j)
      for (long k = 0; k < d; ++k)
        for (long l = 0; l < d; ++l)
          total += a(i, j) * g(k, l) * (b(j, i) * b(l, k) + b(j, k) * b(l, i));
  return total.real();
}

/// Points +-sqrt(d lambda_i) v_i with weight 1/(2d) each: same covariance as
/// the Gaussian measure, different law.
struct DiscreteMeasure {
  std::vector<hilbert::Vector> support;
  double weight = 0.0;
};

DiscreteMeasure discrete_fixture(const hilbert::CovarianceOperator& b) {
  DiscreteMeasure m;
  const auto d = b.dim();
  m.weight = 1.0 / (2.0 * static_cast<double>(d));
  for (const auto& pair : hilbert::spectral_decomposition(b.op())) {
    const double r = std::sqrt(static_cast<double>(d) * std::max(pair.value, 0.0));
    m.support.push_back(r * pair.vector);
    m.support.push_back(-r * pair.vector);
  }
  return m;
}

std::string g(double x) { return fmt::format("{:.6g}", x); }

// ---------------------------------------------------------------------------
// Criteria

Outcome coupling_identity() {
  double worst = 0.0, worst_oracle = 0.0;
  std::size_t cases = 0;
  for (long d : {2L, 4L, 8L, 16L}) {
    for (std::uint64_t k = 0; k < 200; ++k) {
      rng::CounterStream s(kSeedBase + 1, rng::Domain::test_fixtures, static_cast<std::uint64_t>(d) * 1000 + k);
      const auto a = random_hermitian(s, d);
      const long rank = 1 + static_cast<long>(k % static_cast<std::uint64_t>(d));
      const pcsft::FieldMeasure measure(random_covariance(s, d, rank));
      const pcsft::QuadraticVariable f(a);
      const auto check = pcsft::normalized_coupling_check(f, measure);
      const Matrix rho = measure.covariance().matrix() / measure.covariance().matrix().trace().real();
      worst = std::max(worst, std::abs(check.lhs - check.rhs));
      worst_oracle = std::max(worst_oracle, std::abs(check.rhs - trace_oracle(a.matrix(), rho)));
      ++cases;
    }
  }
  return {worst < 1e-10 && worst_oracle < 1e-10,
          fmt::format("{} pairs; max |<f>/E - Tr(rho A)| = {}; max deviation from explicit trace = {}", cases,
                      g(worst), g(worst_oracle))};
}

Outcome mc_consistency(unsigned threads) {
  int within = 0;
  double worst_z = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    rng::CounterStream s(kSeedBase + 2, rng::Domain::test_fixtures, k);
    const auto a = random_hermitian(s, 4);
    const pcsft::FieldMeasure measure(random_covariance(s, 4, 4));
    const pcsft::QuadraticVariable f(a);
    const double exact = trace_oracle(a.matrix(), measure.covariance().matrix());
    const auto mc = pcsft::mc_average(f, measure, 100000, kSeedBase + 200 + k, threads);
    const double z = std::abs(mc.mean - exact) / mc.std_error;
    within += z < 4.0;
    worst_z = std::max(worst_z, z);
  }
  return {within >= 18, fmt::format("{}/20 within 4 stderr (need 18); max |z| = {}", within, g(worst_z))};
}

Outcome wick_oracle(unsigned threads) {
  int within = 0;
  double worst_z = 0.0, worst_closed = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const long d = k < 10 ? 2 : 3;
    rng::CounterStream s(kSeedBase + 3, rng::Domain::test_fixtures, k);
    const auto a = random_hermitian(s, d);
    const auto gk = random_hermitian(s, d);
    const pcsft::FieldMeasure measure(random_covariance(s, d, d));
    const pcsft::QuadraticVariable f(a), h(gk);
    const double exact = pcsft::exact_pair_correlation(f, h, measure);
    const double oracle = isserlis_oracle(a.matrix(), gk.matrix(), measure.covariance().matrix());
    worst_closed = std::max(worst_closed, std::abs(exact - oracle) / std::max(1.0, std::abs(oracle)));
    const auto mc = pcsft::mc_pair_correlation(f, h, measure, 1000000, kSeedBase + 300 + k, threads);
    const double z = std::abs(mc.mean - exact) / mc.std_error;
    within += z < 4.0;
    worst_z = std::max(worst_z, z);
  }
  return {within == 20 && worst_closed < 1e-12,
          fmt::format("{}/20 within 4 sigma; max |z| = {}; closed form vs explicit pairing sum rel. dev. {}", within,
                      g(worst_z), g(worst_closed))};
}

Outcome non_injectivity(unsigned threads) {
  constexpr long d = 4;
  constexpr std::size_t n = 100000;
  rng::CounterStream s(kSeedBase + 4, rng::Domain::test_fixtures, 0);
  const auto raw = random_covariance(s, d, d);
  const hilbert::CovarianceOperator b(raw.op().scaled(1.0 / raw.trace()));
  const pcsft::FieldMeasure gaussian(b);
  const auto discrete = discrete_fixture(b);

  Matrix disc_cov = Matrix::Zero(d, d);
  for (const auto& v : discrete.support) disc_cov += discrete.weight * v * v.adjoint();
  const auto rho_gauss = pcsft::correspondence_state(gaussian);
  const auto rho_disc = hilbert::density_from_covariance(
      hilbert::CovarianceOperator(hilbert::HermitianOperator((disc_cov + disc_cov.adjoint()) / 2.0)));
  const double state_gap = (rho_gauss.matrix() - rho_disc.matrix()).cwiseAbs().maxCoeff();

  const auto gs = pcsft::sample_fields(gaussian, n, kSeedBase + 40, threads);
  std::vector<pcsft::FieldSample> ds(n);
  for (std::size_t k = 0; k < n; ++k) {
    rng::CounterStream pick(kSeedBase + 41, rng::Domain::test_fixtures, k);
    const auto idx = static_cast<std::size_t>(pick.uniform() * static_cast<double>(discrete.support.size()));
    ds[k].amplitudes = discrete.support[std::min(idx, discrete.support.size() - 1)];
  }
  const auto cg = pcsft::empirical_covariance(gs);
  const auto cd = pcsft::empirical_covariance(ds);
  const double cov_gap = (cg.matrix() - cd.matrix()).norm();
  return {state_gap < 1e-12 && cov_gap < 0.02,
          fmt::format("max |rho_gauss - rho_discrete| = {}; empirical covariance Frobenius gap = {} (n = {})",
                      g(state_gap), g(cov_gap), n)};
}

Outcome chsh_quantum_value() {
  const auto rho = bell::singlet_state();
  const auto a = bell::ChshAngles::optimal();
  const double s = bell::chsh_value(rho, a);
  // Singlet correlation -cos(theta_a - theta_b).
  auto e = [](double x, double y) { return -std::cos(x - y); };
  const double oracle = e(a.a1, a.b1) + e(a.a1, a.b2) + e(a.a2, a.b1) - e(a.a2, a.b2);
  const double tsirelson = 2.0 * std::numbers::sqrt2;
  const auto scan = bell::chsh_grid_scan(rho, 61, -std::numbers::pi / 2, std::numbers::pi / 2);
  const bool ok = std::abs(std::abs(s) - tsirelson) < 1e-10 && std::abs(s - oracle) < 1e-10 &&
                  scan.max_abs_s <= tsirelson + 1e-9;
  return {ok, fmt::format("S = {:.15g} (|S| - 2 sqrt 2 = {}); grid 61^4 max |S| = {:.15g}", s,
                          g(std::abs(s) - tsirelson), scan.max_abs_s)};
}

bell::HvStrategy random_strategy(std::uint64_t k) {
  rng::CounterStream s(kSeedBase + 6, rng::Domain::test_fixtures, k);
  auto angle = [&s] { return (2.0 * s.uniform() - 1.0) * std::numbers::pi; };
  switch (k % 3) {
    case 0: return bell::HvStrategy::sphere_sign({angle(), angle(), angle(), angle()});
    case 1: {
      bell::ResponseTable t;
      for (int row = 0; row < 16; ++row) {
        t.weights.push_back(s.uniform());
        bell::Outcomes o{};
        for (int b = 0; b < 4; ++b) o[static_cast<std::size_t>(b)] = ((row >> b) & 1) ? 1 : -1;
        t.rows.push_back(o);
      }
      return bell::HvStrategy(std::move(t));
    }
    default: {
      bell::Outcomes o{};
      for (auto& v : o) v = s.uniform() < 0.5 ? -1 : 1;
      return bell::HvStrategy::constant(o);
    }
  }
}

Outcome classical_bound(unsigned threads) {
  const int bound = bell::deterministic_bound_enumeration();
  int ok_count = 0;
  double worst_excess = -1e300;
  bool pairs_ok = true;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto strategy = random_strategy(k);
    const auto stream = bell::hv_sample(strategy, 100000, kSeedBase + 600 + k, threads);
    const auto est = bell::chsh_estimate(stream);
    const double excess = (std::abs(est.value) - 2.0) / std::max(est.std_error, 1e-300);
    ok_count += std::abs(est.value) <= 2.0 + 5.0 * est.std_error;
    worst_excess = std::max(worst_excess, std::abs(est.value) - 2.0 - 5.0 * est.std_error);
    (void)excess;
    // Six pairwise correlations, all read from the same records.
    for (auto pair : bell::kAllPairs) {
      const double c = bell::empirical_correlation(stream, pair);
      pairs_ok = pairs_ok && std::isfinite(c) && std::abs(c) <= 1.0;
    }
    double s_direct = 0.0;
    for (const auto& r : stream.records) s_direct += bell::deterministic_chsh(r);
    s_direct /= static_cast<double>(stream.records.size());
    pairs_ok = pairs_ok && std::abs(s_direct - bell::chsh_from_stream(stream)) < 1e-12;
  }
  return {bound == 2 && ok_count == 100 && pairs_ok,
          fmt::format("enumeration bound = {}; {}/100 strategies with |S| <= 2 + 5 stderr (max |S| - 2 - 5 stderr = "
                      "{}); six pairs from one stream consistent = {}",
                      bound, ok_count, g(worst_excess), pairs_ok)};
}

Outcome compatibility() {
  const auto r = bell::compatibility_audit(bell::ChshAngles::optimal());
  const double cross = *std::max_element(r.cross.begin(), r.cross.end());
  const bool ok = cross < 1e-12 && r.alice_local > 0.1 && r.bob_local > 0.1;
  return {ok, fmt::format("max cross commutator = {}; local commutators A = {}, B = {}", g(cross), g(r.alice_local),
                          g(r.bob_local))};
}

Outcome stationary_law(unsigned threads) {
  brownian::LangevinConfig c;
  c.potential = brownian::Potential::harmonic({1.0});
  c.temperatures = {1.0};
  c.friction = 1.0;
  c.mass = 1e-3;
  c.dt = 1e-3;
  c.t_end = 6.0;
  c.n_trajectories = 100000;
  c.seed = kSeedBase + 8;
  c.initial.kind = brownian::InitialCondition::Kind::point;
  c.initial.x0 = {0.0};
  c.record_stride = c.n_steps();
  const auto e = brownian::integrate_overdamped(c, threads);
  const auto xs = e.positions_at(e.n_snapshots() - 1);
  const double var = stats::sample_variance(xs);
  const double target = 1.0;  // T / k
  const double sigma = target * std::sqrt(2.0 / static_cast<double>(xs.size() - 1));
  const auto ks = stats::ks_test_normal(xs, 0.0, std::sqrt(target));
  const bool ok = std::abs(var - target) < 3.0 * sigma && ks.p_value > 0.01;
  return {ok, fmt::format("t = {}; variance = {} (target 1, sigma {}); KS D = {}, p = {}", e.times.back(), g(var),
                          g(sigma), g(ks.statistic), g(ks.p_value))};
}

// Harmonic stationary benchmark shared by criteria 9 and 10.
struct OsmoticBench {
  brownian::LangevinConfig config;
  brownian::TrajectoryEnsemble ensemble;
};

const std::vector<double> kEpsilons{4e-3, 6e-3, 8e-3, 1e-2};

const OsmoticBench& osmotic_bench(unsigned threads) {
  static std::unique_ptr<OsmoticBench> bench;
  if (!bench) {
    bench = std::make_unique<OsmoticBench>();
    auto& c = bench->config;
    c.potential = brownian::Potential::harmonic({1.0});
    c.temperatures = {1.0};
    c.friction = 1.0;
    c.mass = 1e-3;
    c.dt = 1e-3;
    c.t_end = 1.0;
    c.n_trajectories = 40000;
    c.seed = kSeedBase + 9;
    c.initial.kind = brownian::InitialCondition::Kind::stationary;
    c.record_stride = 2;
    bench->ensemble = brownian::integrate_overdamped(c, threads);
  }
  return *bench;
}

velocity::VelocityOptions osmotic_bins() {
  velocity::VelocityOptions o;
  o.bins.lo = -2.1;
  o.bins.hi = 2.1;
  o.bins.count = 21;
  return o;
}

Outcome osmotic_identity(unsigned threads) {
  const auto& bench = osmotic_bench(threads);
  const auto opts = osmotic_bins();
  const double eps = kEpsilons.front();
  const auto plus = velocity::coarse_velocity_forward(bench.ensemble, eps, opts);
  const auto minus = velocity::coarse_velocity_backward(bench.ensemble, eps, opts);
  const auto u = velocity::osmotic_velocity(plus, minus);
  const auto ref = velocity::kde_osmotic_reference(bench.ensemble, u, bench.config.diffusion(0), opts);
  std::size_t compared = 0, agree = 0;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < u.bins.size(); ++i) {
    if (!u.bins[i].present || !ref[i].present) continue;
    ++compared;
    const double z = std::abs(u.bins[i].value - ref[i].value) / std::hypot(u.bins[i].std_error, ref[i].std_error);
    agree += z < 3.0;
    worst_z = std::max(worst_z, z);
  }
  const auto* p1 = plus.bin_at(1.0);
  const auto* m1 = minus.bin_at(1.0);
  const auto* u1 = u.bin_at(1.0);
  const bool at_one = p1 && m1 && u1 && p1->present && std::abs(p1->value + 1.0) < 3.0 * p1->std_error &&
                      std::abs(m1->value - 1.0) < 3.0 * m1->std_error &&
                      std::abs(u1->value - 1.0) < 3.0 * u1->std_error;
  const bool ok = compared == u.bins.size() && agree == compared && at_one;
  return {ok, fmt::format("eps = {}; {}/{} bins within 3 sigma of -T d ln P_hat (max z = {}); at x = 1: v+ = {} +- {}, "
                          "v- = {} +- {}, u = {} +- {}",
                          eps, agree, compared, g(worst_z), g(p1 ? p1->value : NAN), g(p1 ? p1->std_error : NAN),
                          g(m1 ? m1->value : NAN), g(m1 ? m1->std_error : NAN), g(u1 ? u1->value : NAN),
                          g(u1 ? u1->std_error : NAN))};
}

Outcome non_smoothness(unsigned threads) {
  const auto& bench = osmotic_bench(threads);
  const auto rows = velocity::nonsmoothness_witness(bench.ensemble, kEpsilons, 0.9, 1.1);
  bool ok = true;
  std::string detail;
  for (const auto& r : rows) {
    ok = ok && (r.gap - 1.0) > 5.0 * r.gap_error;
    detail += fmt::format("{}eps = {}: gap = {} +- {}", detail.empty() ? "" : "; ", r.epsilon, g(r.gap),
                          g(r.gap_error));
  }
  return {ok, detail};
}

Outcome momentum_limit(unsigned threads) {
  brownian::LangevinConfig c;
  c.mass = 1.0;
  c.friction = 1.0;
  c.temperatures = {1.0};
  c.potential = brownian::Potential::free(1);
  c.dt = 1e-3;
  c.t_end = 0.5;
  c.n_trajectories = 20000;
  c.seed = kSeedBase + 11;
  c.initial.kind = brownian::InitialCondition::Kind::stationary;
  const auto e = brownian::integrate_underdamped(c, threads);
  velocity::PhaseBin bin;
  bin.p_lo = 0.9;
  bin.p_hi = 1.1;
  const double eps = c.tau_p() / 100.0;
  const auto r = velocity::momentum_resolution_check(e, c, eps, bin);
  const double pm = r.momentum_velocity.mean;
  auto within = [pm](const stats::MeanError& v) {
    return std::abs(v.mean - pm) < 0.05 * std::abs(pm) + 3.0 * v.std_error;
  };
  return {within(r.v_plus) && within(r.v_minus) && r.v_plus.count > 1000,
          fmt::format("eps = {}; p/m = {}; v+ = {} +- {}; v- = {} +- {}; n = {}", eps, g(pm), g(r.v_plus.mean),
                      g(r.v_plus.std_error), g(r.v_minus.mean), g(r.v_minus.std_error), r.v_plus.count)};
}

// Small configurations covering every command.
std::vector<std::pair<std::string, cli::Json>> determinism_configs() {
  using cli::Json;
  const Json b3{{"re", {{2.0, 0.5, 0.0}, {0.5, 1.0, 0.2}, {0.0, 0.2, 0.5}}},
                {"im", {{0.0, 0.3, 0.0}, {-0.3, 0.0, 0.1}, {0.0, -0.1, 0.0}}}};
  const Json a3 = Json::array({Json::array({1.0, 0.0, 0.5}), Json::array({0.0, -1.0, 0.0}), Json::array({0.5, 0.0, 2.0})});
  const Json osc{{"kind", "harmonic"}, {"stiffness", 1.0}};
  return {
      {"pcsft-average", {{"dim", 3}, {"covariance", b3}, {"kernel", a3}, {"kernels", {"identity"}}, {"n_samples", 20000}, {"seed", 7}}},
      {"pcsft-correlation",
       {{"dim", 3}, {"covariance", b3}, {"kernel", a3}, {"kernel_2", "identity"}, {"n_samples", 20000}, {"seed", 8}}},
      {"chsh-quantum", {{"angles", "optimal"}, {"n_samples", 20000}, {"grid_points", 9}, {"sweep_points", 31}, {"seed", 9}}},
      {"chsh-hv", {{"strategy", {{"kind", "sphere_sign"}}}, {"n_samples", 50000}, {"seed", 10}}},
      {"brownian-ctm",
       {{"potential", osc}, {"dt", 1e-3}, {"t_end", 0.2}, {"n_trajectories", 200}, {"initial", {{"kind", "stationary"}}}, {"seed", 11}}},
      {"brownian-om",
       {{"potential", osc}, {"mass", 1e-3}, {"dt", 1e-3}, {"t_end", 0.5}, {"n_trajectories", 2000}, {"record_stride", 5}, {"seed", 12}}},
      {"velocity-field",
       {{"potential", osc},
        {"mass", 1e-3},
        {"dt", 1e-3},
        {"t_end", 0.5},
        {"n_trajectories", 2000},
        {"initial", {{"kind", "stationary"}}},
        {"seed", 13},
        {"velocity",
         {{"epsilon", {4e-3, 1e-2}},
          {"bins", {{"lo", -2.0}, {"hi", 2.0}, {"count", 8}, {"min_occupancy", 50}}},
          {"witness", {{"lo", 0.9}, {"hi", 1.1}}}}}}},
      {"acceptance", {{"criteria", {5, 7}}}},
  };
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() /
                        fmt::format("bildsim-determinism-{}", std::chrono::steady_clock::now().time_since_epoch().count());
  std::size_t identical = 0, total = 0, files_compared = 0;
  std::string mismatch;
  for (const auto& [command, params] : determinism_configs()) {
    ++total;
    std::vector<std::vector<std::pair<std::string, std::string>>> runs;
    std::vector<std::string> manifests;
    for (unsigned threads : {1u, 8u, 8u}) {
      cli::ExperimentConfig c;
      c.command = command;
      c.params = params;
      c.seed = params.contains("seed") ? params.at("seed").get<std::uint64_t>() : 0;
      c.threads = threads;
      c.out_dir = root / fmt::format("{}-{}-{}", command, threads, runs.size());
      const auto result = cli::run(c);
      std::vector<std::pair<std::string, std::string>> files;
      for (const auto& [name, hash] : result.manifest.files) files.emplace_back(name, io::read_file(c.out_dir / name));
      runs.push_back(std::move(files));
      auto m = io::Json::parse(io::read_file(c.out_dir / "manifest.json"));
      m.erase("wall_clock_seconds");
      m.erase("threads");
      manifests.push_back(m.dump());
    }
    bool same = manifests[0] == manifests[1] && manifests[0] == manifests[2];
    for (std::size_t r = 1; r < runs.size(); ++r) same = same && runs[r] == runs[0];
    files_compared += runs[0].size();
    if (same) {
      ++identical;
    } else if (mismatch.empty()) {
      mismatch = "; first mismatch: " + command;
    }
  }
  std::error_code ignored;
  fs::remove_all(root, ignored);
  return {identical == total, fmt::format("{}/{} commands byte-identical across threads 1, 8, 8 ({} output files){}",
                                          identical, total, files_compared, mismatch)};
}

struct CriterionInfo {
  int id;
  const char* name;
  double time_limit;
};

constexpr std::array<CriterionInfo, kCriterionCount> kCriteria{{
    {1, "PCSFT coupling identity", 5.0},
    {2, "PCSFT Monte Carlo consistency", 30.0},
    {3, "Wick-oracle pair correlation", 120.0},
    {4, "Non-injectivity of the covariance-to-state map", 0.0},
    {5, "CHSH quantum value", 10.0},
    {6, "Classical CHSH bound", 60.0},
    {7, "Compatibility audit", 0.0},
    {8, "Overdamped stationary law", 120.0},
    {9, "Osmotic identity", 300.0},
    {10, "Non-smoothness witness", 0.0},
    {11, "Fine-resolution momentum limit", 0.0},
    {12, "Determinism across thread counts", 0.0},
}};

Outcome dispatch(int id, unsigned threads) {
  switch (id) {
    case 1: return coupling_identity();
    case 2: return mc_consistency(threads);
    case 3: return wick_oracle(threads);
    case 4: return non_injectivity(threads);
    case 5: return chsh_quantum_value();
    case 6: return classical_bound(threads);
    case 7: return compatibility();
    case 8: return stationary_law(threads);
    case 9: return osmotic_identity(threads);
    case 10: return non_smoothness(threads);
    case 11: return momentum_limit(threads);
    case 12: return determinism();
    default: throw ValidationError("no criterion " + std::to_string(id), "criteria");
  }
}

}  // namespace

const char* criterion_name(int id) {
  if (id < 1 || id > kCriterionCount) return "unknown";
  return kCriteria[static_cast<std::size_t>(id - 1)].name;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  std::vector<CriterionResult> results;
  for (const auto& info : kCriteria) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), info.id) == options.only.end()) {
      continue;
    }
    CriterionResult r;
    r.id = info.id;
    r.name = info.name;
    r.time_limit = info.time_limit;
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto outcome = dispatch(info.id, options.threads);
      r.passed = outcome.passed;
      r.detail = outcome.detail;
    } catch (const std::exception& ex) {
      r.passed = false;
      r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.time_limit > 0.0 && r.seconds > r.time_limit) {
      r.passed = false;
      r.detail += fmt::format("; runtime limit {} s exceeded", r.time_limit);
    }
    if (options.on_result) options.on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace bildsim::acceptance
