#pragma once

// The twelve acceptance criteria as executable checks with fixed seeds and
// pinned tolerances. Shared by the acceptance test binary and the
// `bildsim acceptance` command.

#include <functional>
#include <string>
#include <vector>

namespace bildsim::acceptance {

inline constexpr int kCriterionCount = 12;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  /// Measured quantities; deterministic for a given build.
  std::string detail;
  double seconds = 0.0;
  /// Runtime ceiling for the criterion, 0 when none is set.
  double time_limit = 0.0;
};

struct AcceptanceOptions {
  /// Criterion ids to run; empty runs all.
  std::vector<int> only;
  unsigned threads = 0;
  /// Called after each criterion finishes.
  std::function<void(const CriterionResult&)> on_result;
};

const char* criterion_name(int id);

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

}  // namespace bildsim::acceptance
