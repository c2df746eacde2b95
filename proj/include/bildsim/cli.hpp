#pragma once

// Experiment runner behind the `bildsim` executable. Each subcommand reads a
// flat JSON parameter block, computes its outputs in memory and writes them
// atomically, followed by manifest.json.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "bildsim/brownian.hpp"
#include "bildsim/io.hpp"

namespace bildsim::cli {

using io::Json;

enum ExitCode : int { kOk = 0, kAcceptanceFailed = 1, kConfigError = 2, kNumericalError = 3 };

const std::vector<std::string>& command_names();

/// What the command line supplied.
struct Invocation {
  std::string command;
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path out_dir = "bildsim-out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool paper_units = false;
};

struct ExperimentConfig {
  std::string command;
  /// Module parameter block with command-line overrides (seed, paper_units)
  /// folded in.
  Json params = Json::object();
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  /// FNV-1a of the command and the serialized parameter block.
  std::uint64_t hash() const;
};

/// Reads the config file (if any), applies overrides and checks the command
/// name. Per-command key checks happen in compute_outputs.
ExperimentConfig make_config(const Invocation& invocation);

struct RunManifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::string version;
  double wall_clock_seconds = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  /// (name, FNV-1a of contents) in write order.
  std::vector<std::pair<std::string, std::uint64_t>> files;

  Json to_json() const;
};

/// Output files as (name, contents) in write order.
using OutputFiles = std::vector<std::pair<std::string, std::string>>;

struct ComputeResult {
  OutputFiles files;
  /// Non-zero only for a failed acceptance run.
  int status = kOk;
};

/// Runs the experiment without touching the filesystem.
ComputeResult compute_outputs(const ExperimentConfig& config);

struct RunResult {
  RunManifest manifest;
  int status = kOk;
};

/// compute_outputs, then writes every file atomically into out_dir and the
/// manifest last. Throws on failure.
RunResult run(const ExperimentConfig& config);

/// Full front end: builds the config, runs it, maps exceptions to exit codes
/// and writes a one-line JSON error to `err`.
int execute(const Invocation& invocation, std::ostream& out, std::ostream& err);

/// LangevinConfig from the brownian parameter block. Keys outside
/// `extra_keys` and the Langevin schema are rejected.
brownian::LangevinConfig parse_langevin(const Json& params,
                                        std::initializer_list<std::string_view> extra_keys = {});

}  // namespace bildsim::cli
