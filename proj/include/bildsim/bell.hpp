#pragma once

// CHSH bench: quantum correlations of spin observables in the z-x plane, the
// commutation structure of the CHSH context, and local hidden-variable
// strategies whose +-1 outcomes are read off as observable outcomes.

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "bildsim/hilbert.hpp"
#include "bildsim/rng.hpp"

namespace bildsim::bell {

using hilbert::DensityOperator;
using hilbert::HermitianOperator;

struct ChshAngles {
  double a1 = 0.0;
  double a2 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;

  /// (0, pi/2, pi/4, -pi/4): |S| = 2 sqrt 2 for the singlet.
  static ChshAngles optimal();
  /// One-parameter family (0, 2t, t, -t) used for angle sweeps.
  static ChshAngles sweep(double t);
};

/// cos(theta) sigma_z + sin(theta) sigma_x.
HermitianOperator observable_from_angle(double theta);

/// |psi-><psi-|, psi- = (|01> - |10>)/sqrt 2.
DensityOperator singlet_state();

/// Tr(rho A(theta_a) (x) B(theta_b)) for a two-qubit state.
double quantum_correlation(const DensityOperator& rho, double theta_a, double theta_b);

/// S = E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2).
double chsh_value(const DensityOperator& rho, const ChshAngles& angles);

struct CompatibilityReport {
  /// ||[A_i (x) I, I (x) B_j]||_F for (i,j) = (1,1),(1,2),(2,1),(2,2).
  std::array<double, 4> cross{};
  double alice_local = 0.0;  ///< ||[A_1, A_2]||_F
  double bob_local = 0.0;    ///< ||[B_1, B_2]||_F
  /// Some lab has compatible local observables; CHSH cannot be violated.
  bool degenerate = false;
};

CompatibilityReport compatibility_audit(const ChshAngles& angles);

struct ChshGridScan {
  double max_abs_s = 0.0;
  ChshAngles argmax;
  std::size_t points_per_axis = 0;
};

/// Max |S| over a points^4 grid on [lo, hi]^4.
ChshGridScan chsh_grid_scan(const DensityOperator& rho, std::size_t points, double lo,
                            double hi);

// ---------------------------------------------------------------------------
// Hidden-variable strategies

/// Outcomes (A1, A2, B1, B2), each +1 or -1.
using Outcomes = std::array<std::int8_t, 4>;

/// lambda uniform on the unit 2-sphere, responses sign(lambda . n(theta)),
/// n(theta) = (sin theta, 0, cos theta).
struct SphereSign {
  ChshAngles angles;
};

/// Fixed outcomes, independent of lambda.
struct ConstantResponse {
  Outcomes values{1, 1, 1, 1};
};

/// lambda ranges over the rows; row r is drawn with probability
/// weight_r / sum(weights) and prescribes all four outcomes.
struct ResponseTable {
  std::vector<double> weights;
  std::vector<Outcomes> rows;
};

class HvStrategy {
 public:
  using Model = std::variant<SphereSign, ConstantResponse, ResponseTable>;

  /// Throws ValidationError on non-finite angles, outcomes outside {-1,+1},
  /// or a table without positive total weight.
  explicit HvStrategy(Model model);

  static HvStrategy sphere_sign(const ChshAngles& angles) { return HvStrategy(SphereSign{angles}); }
  static HvStrategy constant(const Outcomes& values) { return HvStrategy(ConstantResponse{values}); }

  const Model& model() const noexcept { return model_; }
  std::string describe() const;

  /// Draws one lambda from `stream` and evaluates all four responses.
  Outcomes respond(rng::CounterStream& stream) const;

 private:
  Model model_;
  std::vector<double> cumulative_;  // table only
};

struct OutcomeStream {
  std::vector<Outcomes> records;
  std::uint64_t seed = 0;
  std::string strategy;
};

enum class Pair { A1B1, A1B2, A2B1, A2B2, A1A2, B1B2 };

inline constexpr std::array<Pair, 6> kAllPairs{Pair::A1B1, Pair::A1B2, Pair::A2B1,
                                               Pair::A2B2, Pair::A1A2, Pair::B1B2};

const char* pair_name(Pair pair);

OutcomeStream hv_sample(const HvStrategy& strategy, std::size_t n, std::uint64_t seed,
                        unsigned threads = 0);

/// Mean of the products of the two outcomes named by `pair`.
double empirical_correlation(const OutcomeStream& stream, Pair pair);

/// S from the four cross pairs of one joint stream.
double chsh_from_stream(const OutcomeStream& stream);

struct ChshEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// S with its standard error. On a joint stream S is the mean of the
/// per-record values S_lambda, each of which is +-2.
ChshEstimate chsh_estimate(const OutcomeStream& stream);

/// S assembled from four independent runs, one per cross pair (each run uses
/// its own seed derived from `seed`).
ChshEstimate chsh_from_split_streams(const HvStrategy& strategy, std::size_t n,
                                     std::uint64_t seed, unsigned threads = 0);

/// Model-exact pair correlation of a strategy.
double hv_exact_correlation(const HvStrategy& strategy, Pair pair);

/// S_lambda = A1 B1 + A1 B2 + A2 B1 - A2 B2.
int deterministic_chsh(const Outcomes& assignment);

/// max |S_lambda| over all 16 deterministic assignments.
int deterministic_bound_enumeration();

/// Born-rule sampling of the compatible pair (A(theta_a), B(theta_b)) on
/// `rho`: empirical mean of the outcome products over n runs.
ChshEstimate quantum_pair_sample(const DensityOperator& rho, double theta_a, double theta_b,
                                 std::size_t n, std::uint64_t seed);

}  // namespace bildsim::bell
