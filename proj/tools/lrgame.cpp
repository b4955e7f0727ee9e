#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "lrgame/errors.hpp"
#include "lrgame/harness.hpp"

int main(int argc, char** argv) {
  using namespace lrgame;

  CLI::App app{"Simulator for a stochastic game of memory agents on a long-range random lattice graph"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  bool quiet = false;

  const std::pair<ExperimentKind, const char*> kinds[] = {
      {ExperimentKind::graph_stats, "degree and rho moments of sampled graphs"},
      {ExperimentKind::simulate, "run the dynamics and dump trajectory, final state and memories"},
      {ExperimentKind::fixation, "empirical T, N1/N2/N3 classes, energy decomposition and tail bound"},
      {ExperimentKind::mixing, "coupled pinned boxes: TV estimates, black-front times, linked subboxes"},
      {ExperimentKind::nash_check, "replay sampled agents under unilateral deviations"},
      {ExperimentKind::oracle_check, "compare against brute-force reward, energy and replay oracles"},
  };
  for (const auto& [kind, help] : kinds) {
    auto* sub = app.add_subcommand(std::string(to_string(kind)), help);
    sub->add_option("--config", config_path, "experiment config (key = value lines)")->required();
    sub->add_option("--seed", seed, "override the master seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--replicas", replicas, "override the replica count")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", quiet, "suppress progress output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const auto kind = parse_kind(app.get_subcommands().front()->get_name());
  ExperimentConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << e.what() << '\n';
    return kExitIo;
  }
  if (config.kind != *kind) {
    std::cerr << config_path << ": config kind '" << to_string(config.kind) << "' does not match subcommand '"
              << to_string(*kind) << "'\n";
    return kExitConfig;
  }
  if (seed) config.seed = *seed;
  if (replicas) config.replicas = *replicas;

  return run_experiment(config, RunContext{out_dir, quiet});
}
