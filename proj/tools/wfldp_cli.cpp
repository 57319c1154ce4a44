#include <CLI11.hpp>

#include <iostream>

#include "wfldp/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Large-deviation experiments for Wright-Fisher diffusions"};
  app.set_version_flag("--version", wfldp::kVersion);
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
  app.add_option("--config", config, "experiment config file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides sim.seed)");
  auto* out_opt = app.add_option("--out", out, "output directory (overrides output.dir)");
  app.add_option("--threads", threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.fallthrough();

  const std::vector<std::pair<const char*, wfldp::ExperimentKind>> commands = {
      {"equilibrium-scan", wfldp::ExperimentKind::EquilibriumScan},
      {"simulate", wfldp::ExperimentKind::Simulate},
      {"girsanov-check", wfldp::ExperimentKind::GirsanovCheck},
      {"action", wfldp::ExperimentKind::Action},
      {"minimize-action", wfldp::ExperimentKind::Minimize},
      {"quasipotential", wfldp::ExperimentKind::QuasiPotential},
      {"partition-entropy", wfldp::ExperimentKind::PartitionEntropy},
      {"tube-prob", wfldp::ExperimentKind::PathTube},
  };
  std::optional<wfldp::ExperimentKind> kind;
  for (const auto& [name, k] : commands) {
    app.add_subcommand(name, "run a " + wfldp::to_string(k) + " experiment")->callback([&kind, k = k] { kind = k; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : wfldp::kExitConfig;
  }

  wfldp::RunOptions options;
  if (*seed_opt) options.seed = seed;
  if (*out_opt) options.out = out;
  options.threads = threads;
  options.kind = kind;
  return wfldp::run_experiment_file(config, options, std::cerr);
}
