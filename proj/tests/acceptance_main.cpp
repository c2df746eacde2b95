// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Usage: acceptance [--threads N] [id ...]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "bildsim/acceptance.hpp"

int main(int argc, char** argv) {
  bildsim::acceptance::AcceptanceOptions options;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--threads" && i + 1 < argc) {
      options.threads = static_cast<unsigned>(std::strtoul(argv[++i], nullptr, 10));
    } else {
      options.only.push_back(std::atoi(arg.c_str()));
    }
  }
  int failed = 0;
  options.on_result = [&failed](const bildsim::acceptance::CriterionResult& r) {
    failed += !r.passed;
    std::printf("%s  criterion %2d  %-48s %7.2f s  %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.seconds, r.detail.c_str());
    std::fflush(stdout);
  };
  const auto results = bildsim::acceptance::run_acceptance(options);
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
