#include <iostream>

#include "CLI11.hpp"

#include "bildsim/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bildsim: classical random fields, CHSH correlations and Brownian two-level dynamics"};
  app.set_version_flag("--version", BILDSIM_VERSION);
  app.require_subcommand(1);

  bildsim::cli::Invocation inv;
  std::string config;
  std::uint64_t seed = 0;
  for (const auto& name : bildsim::cli::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON parameter file")->check(CLI::ExistingFile);
    sub->add_option("--out", inv.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--threads", inv.threads, "worker threads, 0 = all cores")->capture_default_str();
    sub->add_flag("--paper-units", inv.paper_units, "set friction to 1 (brownian commands)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    bildsim::io::Json err{{"error", {{"code", 2}, {"kind", "usage"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return bildsim::cli::kConfigError;
  }

  auto* sub = app.get_subcommands().front();
  inv.command = sub->get_name();
  if (!config.empty()) inv.config_path = config;
  if (sub->count("--seed")) inv.seed = seed;
  return bildsim::cli::execute(inv, std::cout, std::cerr);
}
