#pragma once

// Brute-force reference computations. They share only the input data types
// with the library (graph, feelings, configuration, event stream) and
// recompute everything else by direct enumeration.

#include <cstdint>
#include <vector>

#include "lrgame/configuration.hpp"
#include "lrgame/dynamics.hpp"
#include "lrgame/graph.hpp"

namespace lrgame::oracle {

/// Reward of x from a scan over every grid site y, testing membership in the edge list.
int brute_reward(SiteIndex x, const Configuration& config, const Graph& graph, const FeelingMap& feelings);

/// -sum over edges {x,y} of the window-interior halves j(x,y) s_x s_y + j(y,x) s_y s_x.
long long brute_energy(const Configuration& config, const Graph& graph, const FeelingMap& feelings);

struct ReplayStep {
  Spin decision = 0;
  int reward = 0;
};

struct ReplayResult {
  std::vector<ReplayStep> steps;
  Configuration final_config;
};

/// Step-by-step re-implementation of the memory strategy dynamics on the
/// given event sequence, using coins from `plan`.
ReplayResult replay_memory_dynamics(const Graph& graph, const FeelingMap& feelings, const Configuration& initial,
                                    const std::vector<Event>& events, const RandomnessPlan& plan,
                                    bool coin_on_miss = false);

}  // namespace lrgame::oracle

namespace lrgame::oracle {

struct CheckResult {
  int trials = 0;
  int mismatches = 0;
  bool pass() const noexcept { return trials > 0 && mismatches == 0; }
};

/// Random (graph, feelings, configuration) triples on an L x L torus: every
/// site's reward and the window energy against the brute-force versions.
CheckResult check_reward_energy(int side, int trials, std::uint64_t seed, GraphParams params, bool symmetric);

/// Library dynamics against replay_memory_dynamics over the first `events`
/// arrivals, for `seeds` independent seeds. A trial mismatches if any
/// decision, reward or the final configuration differs.
CheckResult check_replay(int side, int seeds, int events, std::uint64_t seed, GraphParams params, bool symmetric);

}  // namespace lrgame::oracle
