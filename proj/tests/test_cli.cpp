#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bildsim/cli.hpp"
#include "bildsim/io.hpp"

namespace fs = std::filesystem;
using bildsim::io::Json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("bildsim-test-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run invoke(const fs::path& dir, const std::string& args) {
  const std::string cmd = std::string(BILDSIM_EXE) + " " + args + " > " + (dir / "stdout").string() +
                          " 2> " + (dir / "stderr").string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(dir / "stdout");
  r.err = slurp(dir / "stderr");
  return r;
}

Run invoke_with(const std::string& name, const std::string& command, const Json& params,
                const std::string& extra = "") {
  const auto dir = scratch(name);
  std::ofstream(dir / "config.json") << params.dump();
  return invoke(dir, command + " --config " + (dir / "config.json").string() + " --out " +
                         (dir / "out").string() + " " + extra);
}

Json error_of(const Run& r) { return Json::parse(r.err).at("error"); }

Json harmonic_run() {
  return Json::parse(R"({"potential": {"kind": "harmonic", "stiffness": [1.0]}, "mass": 0.001,
                         "dt": 0.001, "t_end": 0.05, "n_trajectories": 50})");
}

}  // namespace

TEST(Cli, ChshQuantumSummary) {
  const auto r = invoke_with("chsh", "chsh-quantum", Json::parse(R"({"angles": "optimal", "sweep_points": 5})"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto out = fs::temp_directory_path() / "bildsim-test-cli-chsh" / "out";
  const auto summary = Json::parse(slurp(out / "summary.json"));
  EXPECT_NEAR(summary.at("S_quantum").get<double>(), 2.8284271, 1e-7);
  EXPECT_DOUBLE_EQ(summary.at("S_classical_max").get<double>(), 2.0);
  EXPECT_TRUE(fs::exists(out / "plot.py"));
  const auto manifest = Json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest.at("command"), "chsh-quantum");
  for (const auto& f : manifest.at("files")) {
    const auto name = f.at("name").get<std::string>();
    EXPECT_EQ(f.at("fnv1a"), bildsim::io::hex64(bildsim::io::fnv1a(slurp(out / name)))) << name;
  }
}

TEST(Cli, PcsftIdentityIsExact) {
  const auto r = invoke_with("pcsft", "pcsft-average",
                             Json::parse(R"({"dim": 2, "covariance": "identity", "kernel": "identity",
                                             "n_samples": 1000, "seed": 3})"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(fs::temp_directory_path() / "bildsim-test-cli-pcsft" / "out" / "results.csv");
  EXPECT_NE(csv.find("\naverage:kernel,2,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\nnormalized:kernel,1,"), std::string::npos) << csv;
}

TEST(Cli, NegativeStepNamesField) {
  auto p = harmonic_run();
  p["dt"] = -0.001;
  const auto r = invoke_with("negdt", "brownian-om", p);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_of(r).at("field"), "dt");
  EXPECT_EQ(error_of(r).at("code"), 2);
}

TEST(Cli, UnknownKeyIsRejected) {
  auto p = harmonic_run();
  p["time_step"] = 0.1;
  const auto r = invoke_with("unknown", "brownian-om", p);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_of(r).at("field"), "time_step");
  EXPECT_FALSE(fs::exists(fs::temp_directory_path() / "bildsim-test-cli-unknown" / "out" / "manifest.json"));
}

TEST(Cli, BlowUpExitsWithNumericalError) {
  const auto p = Json::parse(R"({"potential": {"kind": "polynomial", "coefficients": [0, 0, 0, 0, 1]},
                                 "mass": 0.001, "temperatures": [0.0], "dt": 0.1, "t_end": 10.0,
                                 "n_trajectories": 1, "initial": {"x0": [10.0]}})");
  const auto r = invoke_with("blowup", "brownian-om", p);
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(error_of(r).at("kind"), "numerical");
}

TEST(Cli, UsageErrorsExitTwo) {
  const auto dir = scratch("usage");
  EXPECT_EQ(invoke(dir, "no-such-command").code, 2);
  EXPECT_EQ(invoke(dir, "chsh-hv --config /nonexistent.json").code, 2);
  const auto r = invoke_with("paperunits", "chsh-hv", Json::parse(R"({"strategy": {"kind": "sphere_sign"}})"),
                             "--paper-units");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_of(r).at("field"), "paper_units");
}

TEST(Cli, SeedFlagOverridesConfig) {
  const auto params = Json::parse(R"({"strategy": {"kind": "sphere_sign"}, "n_samples": 1000, "seed": 1})");
  ASSERT_EQ(invoke_with("seedA", "chsh-hv", params, "--seed 42").code, 0);
  auto with_seed = params;
  with_seed["seed"] = 42;
  ASSERT_EQ(invoke_with("seedB", "chsh-hv", with_seed).code, 0);
  const auto tmp = fs::temp_directory_path();
  EXPECT_EQ(slurp(tmp / "bildsim-test-cli-seedA" / "out" / "correlations.csv"),
            slurp(tmp / "bildsim-test-cli-seedB" / "out" / "correlations.csv"));
}

TEST(Cli, ShippedConfigsRun) {
  for (const auto& entry : fs::directory_iterator(BILDSIM_CONFIG_DIR)) {
    const auto command = entry.path().stem().string();
    const auto dir = scratch("shipped-" + command);
    const auto r = invoke(dir, command + " --config " + entry.path().string() + " --out " + (dir / "out").string());
    EXPECT_EQ(r.code, 0) << command << ": " << r.err;
    EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json")) << command;
    fs::remove_all(dir);
  }
}
