#include "bildsim/bell.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "bildsim/errors.hpp"

namespace bildsim::bell {
namespace {

using hilbert::Matrix;

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool is_outcome(std::int8_t v) { return v == 1 || v == -1; }

void require_outcomes(const Outcomes& o, const char* what) {
  for (auto v : o) {
    if (!is_outcome(v)) throw ValidationError(std::string(what) + ": outcomes must be +1 or -1");
  }
}

void require_finite(const ChshAngles& a) {
  if (!std::isfinite(a.a1) || !std::isfinite(a.a2) || !std::isfinite(a.b1) ||
      !std::isfinite(a.b2)) {
    throw ValidationError("CHSH angles must be finite", "angles");
  }
}

std::pair<int, int> pair_slots(Pair pair) {
  switch (pair) {
    case Pair::A1B1: return {0, 2};
    case Pair::A1B2: return {0, 3};
    case Pair::A2B1: return {1, 2};
    case Pair::A2B2: return {1, 3};
    case Pair::A1A2: return {0, 1};
    case Pair::B1B2: return {2, 3};
  }
  return {0, 0};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

ChshEstimate mean_and_error(const std::vector<double>& values) {
  const auto n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

}  // namespace

ChshAngles ChshAngles::optimal() {
  return {0.0, std::numbers::pi / 2, std::numbers::pi / 4, -std::numbers::pi / 4};
}

ChshAngles ChshAngles::sweep(double t) { return {0.0, 2.0 * t, t, -t}; }

HermitianOperator observable_from_angle(double theta) {
  Matrix m(2, 2);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  m << c, s, s, -c;
  return HermitianOperator(m);
}

DensityOperator singlet_state() {
  hilbert::Vector psi = hilbert::Vector::Zero(4);
  psi(1) = 1.0 / std::numbers::sqrt2;
  psi(2) = -1.0 / std::numbers::sqrt2;
  return DensityOperator(HermitianOperator::projector(psi));
}

double quantum_correlation(const DensityOperator& rho, double theta_a, double theta_b) {
  if (rho.dim() != 4) {
    throw DimensionMismatch("quantum_correlation: expected a 4x4 two-qubit state, got dim " +
                            std::to_string(rho.dim()));
  }
  const auto joint = hilbert::tensor_product(observable_from_angle(theta_a),
                                             observable_from_angle(theta_b));
  return hilbert::trace_product(rho.op(), joint);
}

double chsh_value(const DensityOperator& rho, const ChshAngles& a) {
  return quantum_correlation(rho, a.a1, a.b1) + quantum_correlation(rho, a.a1, a.b2) +
         quantum_correlation(rho, a.a2, a.b1) - quantum_correlation(rho, a.a2, a.b2);
}

CompatibilityReport compatibility_audit(const ChshAngles& angles) {
  require_finite(angles);
  const auto id = HermitianOperator::identity(2);
  const std::array<HermitianOperator, 2> alice{observable_from_angle(angles.a1),
                                               observable_from_angle(angles.a2)};
  const std::array<HermitianOperator, 2> bob{observable_from_angle(angles.b1),
                                             observable_from_angle(angles.b2)};
  CompatibilityReport report;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      report.cross[2 * i + j] = hilbert::commutator_norm(hilbert::tensor_product(alice[i], id),
                                                         hilbert::tensor_product(id, bob[j]));
    }
  }
  report.alice_local = hilbert::commutator_norm(alice[0], alice[1]);
  report.bob_local = hilbert::commutator_norm(bob[0], bob[1]);
  report.degenerate = report.alice_local <= 1e-12 || report.bob_local <= 1e-12;
  return report;
}

ChshGridScan chsh_grid_scan(const DensityOperator& rho, std::size_t points, double lo,
                            double hi) {
  if (points < 2 || !(hi > lo)) throw ValidationError("chsh_grid_scan: need points >= 2 and hi > lo");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  // S only involves E(a, b), so tabulate it once.
  std::vector<double> e(points * points);
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t j = 0; j < points; ++j) e[i * points + j] = quantum_correlation(rho, grid[i], grid[j]);

  ChshGridScan scan;
  scan.points_per_axis = points;
  std::array<std::size_t, 4> best{};
  for (std::size_t a1 = 0; a1 < points; ++a1)
    for (std::size_t a2 = 0; a2 < points; ++a2)
      for (std::size_t b1 = 0; b1 < points; ++b1)
        for (std::size_t b2 = 0; b2 < points; ++b2) {
          const double s = e[a1 * points + b1] + e[a1 * points + b2] + e[a2 * points + b1] -
                           e[a2 * points + b2];
          if (std::abs(s) > scan.max_abs_s) {
            scan.max_abs_s = std::abs(s);
            best = {a1, a2, b1, b2};
          }
        }
  scan.argmax = {grid[best[0]], grid[best[1]], grid[best[2]], grid[best[3]]};
  return scan;
}

HvStrategy::HvStrategy(Model model) : model_(std::move(model)) {
  if (const auto* s = std::get_if<SphereSign>(&model_)) {
    require_finite(s->angles);
  } else if (const auto* c = std::get_if<ConstantResponse>(&model_)) {
    require_outcomes(c->values, "constant strategy");
  } else {
    const auto& t = std::get<ResponseTable>(model_);
    if (t.rows.empty() || t.rows.size() != t.weights.size()) {
      throw ValidationError("response table needs one weight per row and at least one row",
                            "rows");
    }
    double total = 0.0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (!std::isfinite(t.weights[r]) || t.weights[r] < 0.0) {
        throw ValidationError("response table weights must be finite and non-negative",
                              "weights");
      }
      require_outcomes(t.rows[r], "response table");
      total += t.weights[r];
      cumulative_.push_back(total);
    }
    if (!(total > 0.0)) throw ValidationError("response table has zero total weight", "weights");
  }
}

std::string HvStrategy::describe() const {
  if (const auto* s = std::get_if<SphereSign>(&model_)) {
    return "sphere_sign(a1=" + number(s->angles.a1) + ",a2=" + number(s->angles.a2) +
           ",b1=" + number(s->angles.b1) + ",b2=" + number(s->angles.b2) + ")";
  }
  if (const auto* c = std::get_if<ConstantResponse>(&model_)) {
    std::string out = "constant(";
    for (std::size_t i = 0; i < 4; ++i) out += (i ? "," : "") + std::to_string(c->values[i]);
    return out + ")";
  }
  return "table(rows=" + std::to_string(std::get<ResponseTable>(model_).rows.size()) + ")";
}

Outcomes HvStrategy::respond(rng::CounterStream& stream) const {
  if (const auto* c = std::get_if<ConstantResponse>(&model_)) return c->values;
  if (const auto* s = std::get_if<SphereSign>(&model_)) {
    const double z = 2.0 * stream.uniform() - 1.0;
    const double phi = 2.0 * std::numbers::pi * stream.uniform();
    const double x = std::sqrt(std::max(0.0, 1.0 - z * z)) * std::cos(phi);
    auto sign = [&](double theta) -> std::int8_t {
      return x * std::sin(theta) + z * std::cos(theta) >= 0.0 ? 1 : -1;
    };
    return {sign(s->angles.a1), sign(s->angles.a2), sign(s->angles.b1), sign(s->angles.b2)};
  }
  const auto& t = std::get<ResponseTable>(model_);
  const double u = stream.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto r = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                       t.rows.size() - 1);
  return t.rows[r];
}

const char* pair_name(Pair pair) {
  switch (pair) {
    case Pair::A1B1: return "A1B1";
    case Pair::A1B2: return "A1B2";
    case Pair::A2B1: return "A2B1";
    case Pair::A2B2: return "A2B2";
    case Pair::A1A2: return "A1A2";
    case Pair::B1B2: return "B1B2";
  }
  return "?";
}

OutcomeStream hv_sample(const HvStrategy& strategy, std::size_t n, std::uint64_t seed,
                        unsigned threads) {
  if (n < 1) throw ValidationError("hv_sample needs n >= 1", "n_samples");
  OutcomeStream out{std::vector<Outcomes>(n), seed, strategy.describe()};
  rng::parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      rng::CounterStream stream(seed, rng::Domain::hidden_variables, k);
      out.records[k] = strategy.respond(stream);
    }
  });
  return out;
}

double empirical_correlation(const OutcomeStream& stream, Pair pair) {
  if (stream.records.empty()) throw ValidationError("empty outcome stream", "records");
  const auto [i, j] = pair_slots(pair);
  long long sum = 0;
  for (const auto& r : stream.records) sum += r[i] * r[j];
  return static_cast<double>(sum) / static_cast<double>(stream.records.size());
}

double chsh_from_stream(const OutcomeStream& stream) {
  return empirical_correlation(stream, Pair::A1B1) + empirical_correlation(stream, Pair::A1B2) +
         empirical_correlation(stream, Pair::A2B1) - empirical_correlation(stream, Pair::A2B2);
}

ChshEstimate chsh_estimate(const OutcomeStream& stream) {
  if (stream.records.empty()) throw ValidationError("empty outcome stream", "records");
  std::vector<double> values;
  values.reserve(stream.records.size());
  for (const auto& r : stream.records) values.push_back(deterministic_chsh(r));
  return mean_and_error(values);
}

ChshEstimate chsh_from_split_streams(const HvStrategy& strategy, std::size_t n,
                                     std::uint64_t seed, unsigned threads) {
  constexpr std::array<Pair, 4> cross{Pair::A1B1, Pair::A1B2, Pair::A2B1, Pair::A2B2};
  constexpr std::array<double, 4> sign{1.0, 1.0, 1.0, -1.0};
  ChshEstimate total{0.0, 0.0, n};
  double variance = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto stream = hv_sample(strategy, n, splitmix64(seed ^ (0xC45Bull + k)), threads);
    const auto [i, j] = pair_slots(cross[k]);
    std::vector<double> products;
    products.reserve(n);
    for (const auto& r : stream.records) products.push_back(r[i] * r[j]);
    const auto e = mean_and_error(products);
    total.value += sign[k] * e.value;
    variance += e.std_error * e.std_error;
  }
  total.std_error = std::sqrt(variance);
  return total;
}

double hv_exact_correlation(const HvStrategy& strategy, Pair pair) {
  const auto [i, j] = pair_slots(pair);
  const auto& model = strategy.model();
  if (const auto* c = std::get_if<ConstantResponse>(&model)) {
    return static_cast<double>(c->values[i] * c->values[j]);
  }
  if (const auto* s = std::get_if<SphereSign>(&model)) {
    const std::array<double, 4> theta{s->angles.a1, s->angles.a2, s->angles.b1, s->angles.b2};
    const double angle = std::acos(std::clamp(std::cos(theta[i] - theta[j]), -1.0, 1.0));
    return 1.0 - 2.0 * angle / std::numbers::pi;
  }
  const auto& t = std::get<ResponseTable>(model);
  double num = 0.0, den = 0.0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    num += t.weights[r] * t.rows[r][i] * t.rows[r][j];
    den += t.weights[r];
  }
  return num / den;
}

int deterministic_chsh(const Outcomes& o) {
  return o[0] * o[2] + o[0] * o[3] + o[1] * o[2] - o[1] * o[3];
}

int deterministic_bound_enumeration() {
  int best = 0;
  for (int bits = 0; bits < 16; ++bits) {
    Outcomes o{};
    for (int k = 0; k < 4; ++k) o[k] = (bits >> k) & 1 ? -1 : 1;
    best = std::max(best, std::abs(deterministic_chsh(o)));
  }
  return best;
}

ChshEstimate quantum_pair_sample(const DensityOperator& rho, double theta_a, double theta_b,
                                 std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("quantum_pair_sample needs n >= 1", "n_samples");
  const auto id = HermitianOperator::identity(2);
  auto projector = [&](double theta, int outcome) {
    return HermitianOperator((id.matrix() + outcome * observable_from_angle(theta).matrix()) / 2.0);
  };
  // Probabilities of (+,+), (+,-), (-,+), (-,-).
  constexpr std::array<int, 4> a_out{1, 1, -1, -1};
  constexpr std::array<int, 4> b_out{1, -1, 1, -1};
  std::array<double, 4> cumulative{};
  double acc = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto joint = hilbert::tensor_product(projector(theta_a, a_out[k]),
                                               projector(theta_b, b_out[k]));
    acc += std::max(0.0, hilbert::trace_product(rho.op(), joint));
    cumulative[k] = acc;
  }
  std::vector<double> products(n);
  for (std::size_t r = 0; r < n; ++r) {
    rng::CounterStream stream(seed, rng::Domain::quantum_outcomes, r);
    const double u = stream.uniform() * acc;
    std::size_t k = 0;
    while (k < 3 && u >= cumulative[k]) ++k;
    products[r] = a_out[k] * b_out[k];
  }
  return mean_and_error(products);
}

}  // namespace bildsim::bell
