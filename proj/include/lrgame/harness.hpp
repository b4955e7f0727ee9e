#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrgame/lattice.hpp"

namespace lrgame {

enum class ExperimentKind { graph_stats, simulate, fixation, mixing, nash_check, oracle_check };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view text);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::simulate;
  int L = 0;
  Boundary boundary = Boundary::torus;
  double C = 1.0;
  double gamma = 9.0;
  bool symmetric = false;
  bool coin_on_miss = false;
  double horizon = 0.0;
  int replicas = 1;
  std::uint64_t seed = 0;
  std::vector<double> thresholds{10.0, 20.0, 50.0};
  std::vector<int> ladder{8, 16, 32};

  // Extension keys.
  double rho = 13.0 / 42.0;
  double tv_time = 5.0;
  int threads = 1;
  int agents = 5;         // nash-check: agents sampled per replica
  int nash_box = 2;       // nash-check: half-side of the box whose empirical T sets the cut
  int energy_points = 201;
};

/// Parses a "key = value" document ('#' starts a comment). Throws
/// ConfigError naming the offending line or key.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitInvariant = 3, kExitIo = 4 };

struct RunContext {
  std::filesystem::path out_dir = ".";
  bool quiet = false;
};

/// Runs the configured experiment, writes its CSVs and manifest.json into
/// `out_dir`, and returns the process exit code.
int run_experiment(const ExperimentConfig& config, const RunContext& ctx);

}  // namespace lrgame
