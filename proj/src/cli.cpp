#include "bildsim/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "bildsim/acceptance.hpp"
#include "bildsim/bell.hpp"
#include "bildsim/errors.hpp"
#include "bildsim/pcsft.hpp"
#include "bildsim/plots.hpp"
#include "bildsim/stats.hpp"
#include "bildsim/velocity.hpp"

namespace bildsim::cli {
namespace {

using io::CsvTable;
using io::format_double;
using io::get_count;
using io::get_number;

std::string count_str(std::uint64_t n) { return std::to_string(n); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

bool get_bool(const Json& object, const std::string& key, bool fallback) {
  if (!object.contains(key)) return fallback;
  if (!object.at(key).is_boolean()) throw ValidationError("field '" + key + "' must be true or false", key);
  return object.at(key).get<bool>();
}

std::string get_string(const Json& object, const std::string& key, std::string_view context,
                       std::string fallback) {
  if (!object.contains(key)) return fallback;
  const std::string field = context.empty() ? key : std::string(context) + "." + key;
  if (!object.at(key).is_string()) throw ValidationError("field '" + field + "' must be a string", field);
  return object.at(key).get<std::string>();
}

// ---------------------------------------------------------------------------
// pcsft

struct PcsftInputs {
  long dim = 0;
  pcsft::FieldMeasure measure;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
};

PcsftInputs pcsft_inputs(const ExperimentConfig& c) {
  const auto& p = c.params;
  const auto dim = static_cast<long>(get_count(p, "dim", ""));
  if (dim < 1) throw ValidationError("dim must be >= 1", "dim");
  if (!p.contains("covariance")) throw ValidationError("missing required field 'covariance'", "covariance");
  const auto n = get_count(p, "n_samples", "");
  if (n < 2) throw ValidationError("n_samples must be >= 2", "n_samples");
  hilbert::CovarianceOperator cov(hilbert::HermitianOperator(io::matrix_from_json(p.at("covariance"), "covariance", dim)));
  return {dim, pcsft::FieldMeasure(std::move(cov)), n, c.seed};
}

pcsft::QuadraticVariable kernel_at(const Json& j, const std::string& field, long dim) {
  return pcsft::QuadraticVariable(hilbert::HermitianOperator(io::matrix_from_json(j, field, dim)));
}

const std::vector<std::string> kPcsftColumns{"quantity", "exact", "mc_mean", "mc_stderr", "n", "seed"};

std::vector<std::string> pcsft_row(const std::string& name, double exact, const pcsft::MonteCarloEstimate& mc) {
  return {name, format_double(exact), format_double(mc.mean), format_double(mc.std_error),
          count_str(mc.n_samples), count_str(mc.seed)};
}

ComputeResult pcsft_average(const ExperimentConfig& c) {
  io::reject_unknown_keys(c.params, {"command", "dim", "covariance", "kernel", "kernels", "n_samples", "seed"}, "");
  const auto in = pcsft_inputs(c);
  std::vector<std::pair<std::string, pcsft::QuadraticVariable>> kernels;
  if (!c.params.contains("kernel")) throw ValidationError("missing required field 'kernel'", "kernel");
  kernels.emplace_back("kernel", kernel_at(c.params.at("kernel"), "kernel", in.dim));
  if (c.params.contains("kernels")) {
    const auto& list = c.params.at("kernels");
    if (!list.is_array()) throw ValidationError("'kernels' must be an array of matrices", "kernels");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string field = "kernels[" + std::to_string(i) + "]";
      kernels.emplace_back(field, kernel_at(list[i], field, in.dim));
    }
  }

  const double energy = pcsft::average_energy(in.measure);
  const bool normalizable = energy > hilbert::kDegenerateTrace;
  CsvTable table(kPcsftColumns);
  Json results{{"command", c.command}, {"dim", in.dim}, {"n_samples", in.n}, {"seed", in.seed}};
  const auto identity = pcsft::QuadraticVariable(hilbert::HermitianOperator::identity(in.dim));
  const auto energy_mc = pcsft::mc_average(identity, in.measure, in.n, in.seed, c.threads);
  table.add_row(pcsft_row("energy", energy, energy_mc));
  results["energy"] = {{"exact", energy}, {"mc_mean", energy_mc.mean}, {"mc_stderr", energy_mc.std_error}};

  Json rows = Json::array();
  for (const auto& [name, v] : kernels) {
    const double exact = pcsft::exact_average(v, in.measure);
    const auto mc = pcsft::mc_average(v, in.measure, in.n, in.seed, c.threads);
    table.add_row(pcsft_row("average:" + name, exact, mc));
    Json row{{"name", name}, {"exact", exact}, {"mc_mean", mc.mean}, {"mc_stderr", mc.std_error}};
    if (normalizable) {
      const auto check = pcsft::normalized_coupling_check(v, in.measure);
      pcsft::MonteCarloEstimate scaled = mc;
      scaled.mean /= energy;
      scaled.std_error /= energy;
      table.add_row(pcsft_row("normalized:" + name, check.rhs, scaled));
      row["normalized"] = {{"lhs", check.lhs}, {"rhs", check.rhs}, {"gap", check.gap}};
    }
    rows.push_back(std::move(row));
  }
  results["kernels"] = std::move(rows);
  results["density_operator"] =
      normalizable ? io::matrix_to_json(pcsft::correspondence_state(in.measure).matrix()) : Json(nullptr);
  return {{{"results.csv", table.str()}, {"results.json", io::dump_json(results)}}, kOk};
}

ComputeResult pcsft_correlation(const ExperimentConfig& c) {
  io::reject_unknown_keys(c.params, {"command", "dim", "covariance", "kernel", "kernel_2", "n_samples", "seed"}, "");
  const auto in = pcsft_inputs(c);
  if (!c.params.contains("kernel")) throw ValidationError("missing required field 'kernel'", "kernel");
  if (!c.params.contains("kernel_2")) throw ValidationError("missing required field 'kernel_2'", "kernel_2");
  const auto f = kernel_at(c.params.at("kernel"), "kernel", in.dim);
  const auto g = kernel_at(c.params.at("kernel_2"), "kernel_2", in.dim);

  CsvTable table(kPcsftColumns);
  const double ef = pcsft::exact_average(f, in.measure);
  const double eg = pcsft::exact_average(g, in.measure);
  const double efg = pcsft::exact_pair_correlation(f, g, in.measure);
  const auto mf = pcsft::mc_average(f, in.measure, in.n, in.seed, c.threads);
  const auto mg = pcsft::mc_average(g, in.measure, in.n, in.seed, c.threads);
  const auto mfg = pcsft::mc_pair_correlation(f, g, in.measure, in.n, in.seed, c.threads);
  table.add_row(pcsft_row("average:kernel", ef, mf));
  table.add_row(pcsft_row("average:kernel_2", eg, mg));
  table.add_row(pcsft_row("pair_correlation", efg, mfg));
  Json results{{"command", c.command},
               {"dim", in.dim},
               {"n_samples", in.n},
               {"seed", in.seed},
               {"pair_correlation", {{"exact", efg}, {"mc_mean", mfg.mean}, {"mc_stderr", mfg.std_error}}},
               {"covariance_term", efg - ef * eg}};
  return {{{"results.csv", table.str()}, {"results.json", io::dump_json(results)}}, kOk};
}

// ---------------------------------------------------------------------------
// chsh

bell::ChshAngles parse_angles(const Json& p, const std::string& field) {
  if (!p.contains(field)) return bell::ChshAngles::optimal();
  const auto& j = p.at(field);
  if (j.is_string()) {
    if (j.get<std::string>() != "optimal") throw ValidationError("unknown angle preset '" + j.get<std::string>() + "'", field);
    return bell::ChshAngles::optimal();
  }
  io::reject_unknown_keys(j, {"a1", "a2", "b1", "b2"}, field);
  bell::ChshAngles a;
  a.a1 = get_number(j, "a1", field);
  a.a2 = get_number(j, "a2", field);
  a.b1 = get_number(j, "b1", field);
  a.b2 = get_number(j, "b2", field);
  return a;
}

Json angles_json(const bell::ChshAngles& a) {
  return {{"a1", a.a1}, {"a2", a.a2}, {"b1", a.b1}, {"b2", a.b2}};
}

bell::DensityOperator parse_state(const Json& p) {
  if (!p.contains("state")) return bell::singlet_state();
  const auto& j = p.at("state");
  if (j.is_string() && j.get<std::string>() == "singlet") return bell::singlet_state();
  return bell::DensityOperator(hilbert::HermitianOperator(io::matrix_from_json(j, "state", 4)));
}

constexpr std::array<bell::Pair, 4> kCrossPairs{bell::Pair::A1B1, bell::Pair::A1B2, bell::Pair::A2B1,
                                               bell::Pair::A2B2};

std::pair<double, double> pair_angles(const bell::ChshAngles& a, bell::Pair pair) {
  switch (pair) {
    case bell::Pair::A1B1: return {a.a1, a.b1};
    case bell::Pair::A1B2: return {a.a1, a.b2};
    case bell::Pair::A2B1: return {a.a2, a.b1};
    case bell::Pair::A2B2: return {a.a2, a.b2};
    default: throw std::logic_error("not a cross pair");
  }
}

const std::vector<std::string> kCorrelationColumns{"pair", "empirical", "exact_or_quantum", "n", "seed"};

ComputeResult chsh_quantum(const ExperimentConfig& c) {
  const auto& p = c.params;
  io::reject_unknown_keys(p, {"command", "angles", "state", "n_samples", "seed", "sweep_points", "grid_points"}, "");
  const auto angles = parse_angles(p, "angles");
  const auto rho = parse_state(p);
  const auto n = get_count(p, "n_samples", "", 0);
  const auto sweep_points = get_count(p, "sweep_points", "", 61);
  const auto grid_points = get_count(p, "grid_points", "", 0);
  if (sweep_points == 1) throw ValidationError("sweep_points must be 0 or >= 2", "sweep_points");
  if (grid_points == 1) throw ValidationError("grid_points must be 0 or >= 2", "grid_points");

  const double s = bell::chsh_value(rho, angles);
  CsvTable table(kCorrelationColumns);
  double s_stream = 0.0, s_var = 0.0;
  for (std::size_t k = 0; k < kCrossPairs.size(); ++k) {
    const auto [ta, tb] = pair_angles(angles, kCrossPairs[k]);
    const double exact = bell::quantum_correlation(rho, ta, tb);
    std::string empirical;
    const std::uint64_t pair_seed = derive_seed(c.seed, k);
    if (n > 0) {
      const auto est = bell::quantum_pair_sample(rho, ta, tb, n, pair_seed);
      empirical = format_double(est.value);
      s_stream += (k == 3 ? -1.0 : 1.0) * est.value;
      s_var += est.std_error * est.std_error;
    }
    table.add_row({bell::pair_name(kCrossPairs[k]), empirical, format_double(exact), count_str(n),
                   count_str(pair_seed)});
  }

  const auto audit = bell::compatibility_audit(angles);
  Json summary{{"S_quantum", std::abs(s)},
               {"S_quantum_signed", s},
               {"S_classical_max", bell::deterministic_bound_enumeration()},
               {"S_stream", n > 0 ? Json(std::abs(s_stream)) : Json(nullptr)},
               {"S_stream_signed", n > 0 ? Json(s_stream) : Json(nullptr)},
               {"S_stream_stderr", n > 0 ? Json(std::sqrt(s_var)) : Json(nullptr)},
               {"n_samples", n},
               {"seed", c.seed},
               {"angles", angles_json(angles)},
               {"compatibility",
                {{"cross", audit.cross}, {"alice_local", audit.alice_local}, {"bob_local", audit.bob_local},
                 {"degenerate", audit.degenerate}}}};
  if (grid_points > 0) {
    const auto scan = bell::chsh_grid_scan(rho, grid_points, -std::numbers::pi / 2, std::numbers::pi / 2);
    summary["grid_scan"] = {{"points_per_axis", scan.points_per_axis},
                            {"max_abs_S", scan.max_abs_s},
                            {"argmax", angles_json(scan.argmax)}};
  }
  OutputFiles files{{"correlations.csv", table.str()}};
  if (sweep_points > 0) {
    CsvTable sweep({"t", "S_quantum", "S_sphere_sign", "classical_bound"});
    for (std::uint64_t i = 0; i < sweep_points; ++i) {
      const double t = std::numbers::pi * static_cast<double>(i) / static_cast<double>(sweep_points - 1);
      const auto a = bell::ChshAngles::sweep(t);
      const auto hv = bell::HvStrategy::sphere_sign(a);
      const double s_hv = bell::hv_exact_correlation(hv, bell::Pair::A1B1) +
                          bell::hv_exact_correlation(hv, bell::Pair::A1B2) +
                          bell::hv_exact_correlation(hv, bell::Pair::A2B1) -
                          bell::hv_exact_correlation(hv, bell::Pair::A2B2);
      sweep.add_row({format_double(t), format_double(bell::chsh_value(rho, a)), format_double(s_hv), "2"});
    }
    files.emplace_back("sweep.csv", sweep.str());
  }
  files.emplace_back("summary.json", io::dump_json(summary));
  return {std::move(files), kOk};
}

bell::Outcomes parse_outcomes(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 4) throw ValidationError("outcomes need 4 entries (A1, A2, B1, B2)", field);
  bell::Outcomes o{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j[i].is_number_integer()) throw ValidationError("outcomes must be +1 or -1", field);
    o[i] = static_cast<std::int8_t>(std::clamp<long long>(j[i].get<long long>(), -128, 127));
  }
  return o;
}

bell::HvStrategy parse_strategy(const Json& p, const bell::ChshAngles& angles) {
  if (!p.contains("strategy")) return bell::HvStrategy::sphere_sign(angles);
  const auto& j = p.at("strategy");
  const std::string kind = get_string(j, "kind", "strategy", "");
  if (kind == "sphere_sign") {
    io::reject_unknown_keys(j, {"kind", "angles"}, "strategy");
    return bell::HvStrategy::sphere_sign(j.contains("angles") ? parse_angles(j, "angles") : angles);
  }
  if (kind == "constant") {
    io::reject_unknown_keys(j, {"kind", "values"}, "strategy");
    if (!j.contains("values")) throw ValidationError("missing 'strategy.values'", "strategy.values");
    return bell::HvStrategy::constant(parse_outcomes(j.at("values"), "strategy.values"));
  }
  if (kind == "table") {
    io::reject_unknown_keys(j, {"kind", "weights", "rows"}, "strategy");
    bell::ResponseTable table;
    table.weights = io::get_numbers(j, "weights", "strategy");
    if (!j.contains("rows") || !j.at("rows").is_array()) throw ValidationError("missing 'strategy.rows'", "strategy.rows");
    for (const auto& r : j.at("rows")) table.rows.push_back(parse_outcomes(r, "strategy.rows"));
    return bell::HvStrategy(std::move(table));
  }
  throw ValidationError("strategy.kind must be sphere_sign, constant or table", "strategy.kind");
}

ComputeResult chsh_hv(const ExperimentConfig& c) {
  const auto& p = c.params;
  io::reject_unknown_keys(p, {"command", "strategy", "angles", "n_samples", "seed"}, "");
  const auto angles = parse_angles(p, "angles");
  const auto strategy = parse_strategy(p, angles);
  const auto n = get_count(p, "n_samples", "");
  if (n < 2) throw ValidationError("n_samples must be >= 2", "n_samples");

  const auto stream = bell::hv_sample(strategy, n, c.seed, c.threads);
  CsvTable table(kCorrelationColumns);
  for (auto pair : bell::kAllPairs) {
    table.add_row({bell::pair_name(pair), format_double(bell::empirical_correlation(stream, pair)),
                   format_double(bell::hv_exact_correlation(strategy, pair)), count_str(n), count_str(c.seed)});
  }
  const auto joint = bell::chsh_estimate(stream);
  const auto split = bell::chsh_from_split_streams(strategy, n, c.seed, c.threads);
  double s_model = 0.0;
  for (std::size_t k = 0; k < kCrossPairs.size(); ++k) {
    s_model += (k == 3 ? -1.0 : 1.0) * bell::hv_exact_correlation(strategy, kCrossPairs[k]);
  }
  Json summary{{"S_quantum", std::abs(bell::chsh_value(bell::singlet_state(), angles))},
               {"S_classical_max", bell::deterministic_bound_enumeration()},
               {"S_stream", joint.value},
               {"S_stream_stderr", joint.std_error},
               {"S_split", split.value},
               {"S_split_stderr", split.std_error},
               {"S_model", s_model},
               {"strategy", strategy.describe()},
               {"angles", angles_json(angles)},
               {"n_samples", n},
               {"seed", c.seed}};
  return {{{"correlations.csv", table.str()}, {"summary.json", io::dump_json(summary)}}, kOk};
}

// ---------------------------------------------------------------------------
// brownian

const std::initializer_list<std::string_view> kLangevinKeys{
    "n_particles", "mass", "friction", "temperatures", "potential", "dt", "t_end",
    "n_trajectories", "seed", "paper_units", "initial", "record_stride", "integrator"};

brownian::Potential parse_potential(const Json& p, std::size_t n) {
  if (!p.contains("potential")) return brownian::Potential::free(n);
  const auto& j = p.at("potential");
  io::reject_unknown_keys(j, {"kind", "stiffness", "coefficients", "coupling"}, "potential");
  const std::string kind = get_string(j, "kind", "potential", "");
  const double coupling = get_number(j, "coupling", "potential", 0.0);
  if (kind == "free") return brownian::Potential::free(n, coupling);
  if (kind == "harmonic") {
    auto k = io::get_numbers(j, "stiffness", "potential");
    if (k.size() == 1 && n > 1) k.assign(n, k.front());
    if (k.size() != n) throw DimensionMismatch("potential.stiffness needs 1 or n_particles entries", "potential.stiffness");
    return brownian::Potential::harmonic(std::move(k), coupling);
  }
  if (kind == "polynomial") {
    return brownian::Potential::polynomial(io::get_numbers(j, "coefficients", "potential"), n, coupling);
  }
  throw ValidationError("potential.kind must be free, harmonic or polynomial", "potential.kind");
}

brownian::InitialCondition parse_initial(const Json& p) {
  brownian::InitialCondition ic;
  if (!p.contains("initial")) return ic;
  const auto& j = p.at("initial");
  io::reject_unknown_keys(j, {"kind", "x0", "p0", "low", "high"}, "initial");
  const std::string kind = get_string(j, "kind", "initial", "point");
  if (kind == "point") {
    ic.kind = brownian::InitialCondition::Kind::point;
  } else if (kind == "stationary") {
    ic.kind = brownian::InitialCondition::Kind::stationary;
  } else if (kind == "uniform") {
    ic.kind = brownian::InitialCondition::Kind::uniform;
  } else {
    throw ValidationError("initial.kind must be point, stationary or uniform", "initial.kind");
  }
  if (j.contains("x0")) ic.x0 = io::get_numbers(j, "x0", "initial");
  if (j.contains("p0")) ic.p0 = io::get_numbers(j, "p0", "initial");
  ic.low = get_number(j, "low", "initial", ic.low);
  ic.high = get_number(j, "high", "initial", ic.high);
  return ic;
}

struct VelocityParams {
  std::vector<double> epsilons;
  velocity::VelocityOptions options;
  std::size_t kde_batches = velocity::kDefaultKdeBatches;
  std::optional<std::pair<double, double>> witness;
  std::optional<velocity::PhaseBin> momentum_bin;
};

VelocityParams parse_velocity(const Json& p) {
  if (!p.contains("velocity")) throw ValidationError("missing required field 'velocity'", "velocity");
  const auto& j = p.at("velocity");
  io::reject_unknown_keys(j, {"epsilon", "bins", "skip_before", "reference_stride", "kde_batches", "witness", "momentum_bin"},
                          "velocity");
  VelocityParams v;
  v.epsilons = io::get_numbers(j, "epsilon", "velocity");
  if (v.epsilons.empty()) throw ValidationError("velocity.epsilon is empty", "velocity.epsilon");
  if (!j.contains("bins")) throw ValidationError("missing required field 'velocity.bins'", "velocity.bins");
  const auto& b = j.at("bins");
  io::reject_unknown_keys(b, {"lo", "hi", "count", "particle", "min_occupancy"}, "velocity.bins");
  auto& bins = v.options.bins;
  bins.lo = get_number(b, "lo", "velocity.bins");
  bins.hi = get_number(b, "hi", "velocity.bins");
  bins.count = get_count(b, "count", "velocity.bins");
  bins.particle = get_count(b, "particle", "velocity.bins", 0);
  bins.min_occupancy = get_count(b, "min_occupancy", "velocity.bins", velocity::kDefaultMinOccupancy);
  v.options.skip_before = get_number(j, "skip_before", "velocity", 0.0);
  v.options.reference_stride = get_count(j, "reference_stride", "velocity", 0);
  v.kde_batches = get_count(j, "kde_batches", "velocity", velocity::kDefaultKdeBatches);
  if (j.contains("witness")) {
    const auto& w = j.at("witness");
    io::reject_unknown_keys(w, {"lo", "hi"}, "velocity.witness");
    v.witness.emplace(get_number(w, "lo", "velocity.witness"), get_number(w, "hi", "velocity.witness"));
  }
  if (j.contains("momentum_bin")) {
    const auto& m = j.at("momentum_bin");
    io::reject_unknown_keys(m, {"x_lo", "x_hi", "p_lo", "p_hi"}, "velocity.momentum_bin");
    velocity::PhaseBin pb;
    pb.x_lo = get_number(m, "x_lo", "velocity.momentum_bin", pb.x_lo);
    pb.x_hi = get_number(m, "x_hi", "velocity.momentum_bin", pb.x_hi);
    pb.p_lo = get_number(m, "p_lo", "velocity.momentum_bin");
    pb.p_hi = get_number(m, "p_hi", "velocity.momentum_bin");
    pb.particle = bins.particle;
    v.momentum_bin = pb;
  }
  return v;
}

Json timescale_json(const brownian::TimescaleReport& r) {
  return {{"tau_p", r.tau_p},
          {"tau_x", std::isfinite(r.tau_x) ? Json(r.tau_x) : Json("inf")},
          {"tau_x_estimated", r.tau_x_estimated},
          {"regime", r.overdamped ? "overdamped" : "underdamped"}};
}

std::string moments_csv(const brownian::TrajectoryEnsemble& e) {
  std::vector<std::string> header{"time", "particle", "x_mean", "x_variance"};
  if (e.has_momenta()) {
    header.emplace_back("p_mean");
    header.emplace_back("p_variance");
  }
  CsvTable table(std::move(header));
  for (std::size_t s = 0; s < e.n_snapshots(); ++s) {
    for (std::size_t i = 0; i < e.n_particles; ++i) {
      const auto xs = e.positions_at(s, i);
      const auto mx = stats::mean_and_error(xs);
      std::vector<std::string> row{format_double(e.times[s]), std::to_string(i), format_double(mx.mean),
                                   format_double(xs.size() > 1 ? stats::sample_variance(xs) : 0.0)};
      if (e.has_momenta()) {
        const auto ps = e.momenta_at(s, i);
        row.push_back(format_double(stats::mean_and_error(ps).mean));
        row.push_back(format_double(ps.size() > 1 ? stats::sample_variance(ps) : 0.0));
      }
      table.add_row(std::move(row));
    }
  }
  return table.str();
}

ComputeResult brownian_run(const ExperimentConfig& c, bool underdamped) {
  const auto& p = c.params;
  const auto config = parse_langevin(p, {"command", "output_format"});
  const std::string format = get_string(p, "output_format", "", "auto");
  if (format != "auto" && format != "binary" && format != "csv") {
    throw ValidationError("output_format must be auto, binary or csv", "output_format");
  }
  const auto timescales = brownian::timescale_report(config, c.threads);
  const auto e = underdamped ? brownian::integrate_underdamped(config, c.threads)
                             : brownian::integrate_overdamped(config, c.threads);
  const bool csv = format == "csv" || (format == "auto" && e.positions.size() <= 100000);

  Json final_moments = Json::array();
  const std::size_t last = e.n_snapshots() - 1;
  for (std::size_t i = 0; i < e.n_particles; ++i) {
    const auto xs = e.positions_at(last, i);
    Json m{{"particle", i},
           {"x_mean", stats::mean_and_error(xs).mean},
           {"x_variance", xs.size() > 1 ? stats::sample_variance(xs) : 0.0}};
    if (config.potential.kind() == brownian::PotentialKind::harmonic && config.potential.coupling() == 0.0 &&
        config.potential.stiffness()[i] > 0.0) {
      m["stationary_variance_theory"] = config.temperature(i) / config.potential.stiffness()[i];
    }
    final_moments.push_back(std::move(m));
  }
  Json summary{{"command", c.command},
               {"level", underdamped ? "underdamped" : "overdamped"},
               {"integrator", brownian::integrator_name(config.integrator)},
               {"timescales", timescale_json(timescales)},
               {"n_trajectories", e.n_trajectories},
               {"n_particles", e.n_particles},
               {"n_snapshots", e.n_snapshots()},
               {"t_final", e.times.back()},
               {"ensemble_hash", io::hex64(e.config_hash)},
               {"seed", config.seed},
               {"final_moments", std::move(final_moments)}};
  OutputFiles files;
  if (csv) {
    files.emplace_back("trajectories.csv", io::trajectories_csv(e));
  } else {
    files.emplace_back("trajectories.bin", io::encode_trajectories(e));
  }
  files.emplace_back("moments.csv", moments_csv(e));
  files.emplace_back("summary.json", io::dump_json(summary));
  return {std::move(files), kOk};
}

std::vector<std::string> mean_error_cells(const stats::MeanError& m) {
  return {format_double(m.mean), format_double(m.std_error)};
}

ComputeResult velocity_field(const ExperimentConfig& c) {
  const auto& p = c.params;
  const auto config = parse_langevin(p, {"command", "level", "velocity"});
  const std::string level = get_string(p, "level", "", "overdamped");
  if (level != "overdamped" && level != "underdamped") {
    throw ValidationError("level must be overdamped or underdamped", "level");
  }
  const bool underdamped = level == "underdamped";
  const auto v = parse_velocity(p);
  if (v.options.bins.particle >= config.n_particles) {
    throw ValidationError("velocity.bins.particle out of range", "velocity.bins.particle");
  }
  if (v.momentum_bin && !underdamped) {
    throw ValidationError("velocity.momentum_bin needs level = underdamped", "velocity.momentum_bin");
  }
  const auto e = underdamped ? brownian::integrate_underdamped(config, c.threads)
                             : brownian::integrate_overdamped(config, c.threads);
  const double diffusion = config.diffusion(v.options.bins.particle);

  CsvTable field({"bin_center", "v_plus", "v_plus_err", "v_minus", "v_minus_err", "u", "u_err", "epsilon", "count"});
  CsvTable overlay({"bin_center", "mean_position", "u", "u_err", "kde_u", "kde_u_err", "epsilon"});
  Json per_eps = Json::array();
  for (double eps : v.epsilons) {
    const auto plus = velocity::coarse_velocity_forward(e, eps, v.options);
    const auto minus = velocity::coarse_velocity_backward(e, eps, v.options);
    const auto u = velocity::osmotic_velocity(plus, minus);
    const auto ref = velocity::kde_osmotic_reference(e, u, diffusion, v.options, v.kde_batches);
    std::size_t present = 0;
    for (std::size_t i = 0; i < u.bins.size(); ++i) {
      const auto& b = u.bins[i];
      present += b.present;
      field.add_row({format_double(b.center), format_double(plus.bins[i].value), format_double(plus.bins[i].std_error),
                     format_double(minus.bins[i].value), format_double(minus.bins[i].std_error), format_double(b.value),
                     format_double(b.std_error), format_double(eps), count_str(b.count)});
      overlay.add_row({format_double(b.center), format_double(b.mean_position), format_double(b.value),
                       format_double(b.std_error), format_double(ref[i].value), format_double(ref[i].std_error),
                       format_double(eps)});
    }
    per_eps.push_back({{"epsilon", eps}, {"bins_present", present}, {"bins_total", u.bins.size()}});
  }
  Json summary{{"command", c.command},
               {"level", level},
               {"diffusion", diffusion},
               {"timescales", timescale_json(brownian::timescale_report(config, c.threads))},
               {"n_trajectories", e.n_trajectories},
               {"seed", config.seed},
               {"epsilons", std::move(per_eps)}};
  OutputFiles files{{"velocity.csv", field.str()}, {"overlay.csv", overlay.str()}};

  if (v.witness) {
    if (underdamped) throw ValidationError("velocity.witness needs level = overdamped", "velocity.witness");
    CsvTable witness({"epsilon", "v_plus", "v_plus_err", "v_minus", "v_minus_err", "gap", "gap_err", "count"});
    const auto rows = velocity::nonsmoothness_witness(e, v.epsilons, v.witness->first, v.witness->second, v.options);
    for (const auto& r : rows) {
      witness.add_row({format_double(r.epsilon), format_double(r.v_plus.value), format_double(r.v_plus.std_error),
                       format_double(r.v_minus.value), format_double(r.v_minus.std_error), format_double(r.gap),
                       format_double(r.gap_error), count_str(r.v_plus.count)});
    }
    files.emplace_back("witness.csv", witness.str());
  }
  if (v.momentum_bin) {
    CsvTable momentum({"epsilon", "epsilon_over_tau_p", "v_plus", "v_plus_err", "v_minus", "v_minus_err", "p_over_m",
                       "p_over_m_err", "count", "fine_resolution"});
    const double tau_p = config.tau_p();
    for (double eps : v.epsilons) {
      const auto r = velocity::phase_space_velocity(e, config.mass, tau_p, eps, *v.momentum_bin);
      std::vector<std::string> row{format_double(eps), format_double(eps / tau_p)};
      for (const auto& m : {r.v_plus, r.v_minus, r.momentum_velocity}) {
        const auto cells = mean_error_cells(m);
        row.insert(row.end(), cells.begin(), cells.end());
      }
      row.push_back(count_str(r.v_plus.count));
      row.emplace_back(eps <= tau_p / 50.0 ? "true" : "false");
      momentum.add_row(std::move(row));
    }
    files.emplace_back("momentum.csv", momentum.str());
  }
  files.emplace_back("summary.json", io::dump_json(summary));
  return {std::move(files), kOk};
}

// ---------------------------------------------------------------------------
// acceptance

ComputeResult acceptance_run(const ExperimentConfig& c) {
  io::reject_unknown_keys(c.params, {"command", "criteria", "seed"}, "");
  acceptance::AcceptanceOptions options;
  options.threads = c.threads;
  if (c.params.contains("criteria")) {
    for (double id : io::get_numbers(c.params, "criteria", "")) {
      if (id < 1 || id > acceptance::kCriterionCount || id != std::floor(id)) {
        throw ValidationError("criteria entries must be integers in 1..12", "criteria");
      }
      options.only.push_back(static_cast<int>(id));
    }
  }
  const auto results = acceptance::run_acceptance(options);
  CsvTable table({"id", "name", "passed", "detail"});
  std::size_t failed = 0;
  for (const auto& r : results) {
    failed += !r.passed;
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    table.add_row({std::to_string(r.id), r.name, r.passed ? "true" : "false", detail});
  }
  Json summary{{"command", c.command}, {"criteria_run", results.size()}, {"failed", failed}};
  return {{{"acceptance.csv", table.str()}, {"summary.json", io::dump_json(summary)}},
          failed ? kAcceptanceFailed : kOk};
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"pcsft-average", "pcsft-correlation", "chsh-quantum", "chsh-hv",
                                              "brownian-ctm",  "brownian-om",       "velocity-field", "acceptance"};
  return names;
}

std::uint64_t ExperimentConfig::hash() const { return io::fnv1a(command + "\n" + params.dump()); }

ExperimentConfig make_config(const Invocation& inv) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), inv.command) == names.end()) {
    throw ValidationError("unknown command '" + inv.command + "'", "command");
  }
  ExperimentConfig c;
  c.command = inv.command;
  c.out_dir = inv.out_dir;
  c.threads = inv.threads;
  if (inv.config_path) {
    const std::string text = io::read_file(*inv.config_path);
    try {
      c.params = Json::parse(text);
    } catch (const Json::parse_error& ex) {
      throw ValidationError(std::string("config is not valid JSON: ") + ex.what(), "config");
    }
  } else if (inv.command != "acceptance") {
    throw ValidationError("--config is required for " + inv.command, "config");
  }
  if (!c.params.is_object()) throw ValidationError("config must be a JSON object", "config");
  if (c.params.contains("command") && c.params.at("command") != inv.command) {
    throw ValidationError("config is for command " + c.params.at("command").dump() + ", not " + inv.command, "command");
  }
  if (inv.seed) {
    c.params["seed"] = *inv.seed;
  }
  c.seed = get_count(c.params, "seed", "", 0);
  if (inv.paper_units) {
    if (c.command.rfind("brownian", 0) != 0 && c.command != "velocity-field") {
      throw ValidationError("--paper-units applies to brownian-* and velocity-field only", "paper_units");
    }
    c.params["paper_units"] = true;
  }
  return c;
}

Json RunManifest::to_json() const {
  Json list = Json::array();
  for (const auto& [name, h] : files) list.push_back({{"name", name}, {"fnv1a", io::hex64(h)}});
  return {{"command", command},
          {"config_hash", io::hex64(config_hash)},
          {"version", version},
          {"wall_clock_seconds", wall_clock_seconds},
          {"seed", seed},
          {"threads", threads},
          {"files", std::move(list)}};
}

ComputeResult compute_outputs(const ExperimentConfig& c) {
  ComputeResult r;
  if (c.command == "pcsft-average") {
    r = pcsft_average(c);
  } else if (c.command == "pcsft-correlation") {
    r = pcsft_correlation(c);
  } else if (c.command == "chsh-quantum") {
    r = chsh_quantum(c);
  } else if (c.command == "chsh-hv") {
    r = chsh_hv(c);
  } else if (c.command == "brownian-ctm") {
    r = brownian_run(c, true);
  } else if (c.command == "brownian-om") {
    r = brownian_run(c, false);
  } else if (c.command == "velocity-field") {
    r = velocity_field(c);
  } else if (c.command == "acceptance") {
    r = acceptance_run(c);
  } else {
    throw ValidationError("unknown command '" + c.command + "'", "command");
  }
  auto extra = plots::emit_plot_bundle(c.command, r.files);
  for (auto& f : extra) r.files.push_back(std::move(f));
  return r;
}

RunResult run(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  auto computed = compute_outputs(c);
  std::filesystem::create_directories(c.out_dir);
  RunResult result;
  result.status = computed.status;
  auto& m = result.manifest;
  m.command = c.command;
  m.config_hash = c.hash();
  m.version = BILDSIM_VERSION;
  m.seed = c.seed;
  m.threads = rng::resolve_threads(c.threads);
  for (const auto& [name, content] : computed.files) {
    io::write_atomic(c.out_dir / name, content);
    m.files.emplace_back(name, io::fnv1a(content));
  }
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  io::write_atomic(c.out_dir / "manifest.json", io::dump_json(m.to_json()));
  return result;
}

int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  auto report = [&err](int code, const char* kind, const std::string& message, const std::string& field) {
    Json e{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
    if (!field.empty()) e["error"]["field"] = field;
    err << e.dump() << "\n";
    return code;
  };
  try {
    const auto config = make_config(inv);
    const auto result = run(config);
    Json done{{"status", result.status == kOk ? "ok" : "acceptance_failed"},
              {"out", config.out_dir.string()},
              {"config_hash", io::hex64(result.manifest.config_hash)},
              {"files", result.manifest.files.size() + 1}};
    out << done.dump() << "\n";
    return result.status;
  } catch (const ValidationError& ex) {
    return report(kConfigError, "config", ex.what(), ex.field());
  } catch (const Json::exception& ex) {
    return report(kConfigError, "config", ex.what(), "");
  } catch (const std::filesystem::filesystem_error& ex) {
    return report(kConfigError, "io", ex.what(), "out");
  } catch (const NumericalError& ex) {
    return report(kNumericalError, "numerical", ex.what(), "");
  } catch (const std::exception& ex) {
    return report(kNumericalError, "internal", ex.what(), "");
  }
}

brownian::LangevinConfig parse_langevin(const Json& p, std::initializer_list<std::string_view> extra_keys) {
  std::vector<std::string_view> allowed(kLangevinKeys);
  allowed.insert(allowed.end(), extra_keys.begin(), extra_keys.end());
  if (!p.is_object()) throw ValidationError("config must be a JSON object", "config");
  for (const auto& item : p.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ValidationError("unknown key '" + item.key() + "'", item.key());
    }
  }
  brownian::LangevinConfig c;
  c.n_particles = get_count(p, "n_particles", "", 1);
  c.mass = get_number(p, "mass", "", 1.0);
  c.friction = get_number(p, "friction", "", 1.0);
  if (p.contains("temperatures")) c.temperatures = io::get_numbers(p, "temperatures", "");
  c.potential = parse_potential(p, c.n_particles);
  c.dt = get_number(p, "dt", "");
  c.t_end = get_number(p, "t_end", "");
  c.n_trajectories = get_count(p, "n_trajectories", "");
  c.seed = get_count(p, "seed", "", 0);
  c.paper_units = get_bool(p, "paper_units", false);
  c.initial = parse_initial(p);
  c.record_stride = get_count(p, "record_stride", "", 1);
  const std::string integrator = get_string(p, "integrator", "", "euler_maruyama");
  if (integrator == "euler_maruyama") {
    c.integrator = brownian::Integrator::euler_maruyama;
  } else if (integrator == "exponential_euler") {
    c.integrator = brownian::Integrator::exponential_euler;
  } else {
    throw ValidationError("integrator must be euler_maruyama or exponential_euler", "integrator");
  }
  c.validate();
  return c;
}

}  // namespace bildsim::cli
