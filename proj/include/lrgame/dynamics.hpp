#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "lrgame/configuration.hpp"
#include "lrgame/graph.hpp"
#include "lrgame/strategy.hpp"

namespace lrgame {

struct Event {
  double time = 0.0;
  SiteIndex site = 0;
  std::uint32_t arrival = 0;  // 1-based index on the site's clock

  bool operator==(const Event&) const = default;
};

/// Merged unit-rate Poisson arrivals of every interior site on (0, horizon].
/// Sorted by time; exact ties fall back to site order.
struct EventStream {
  std::vector<Event> events;
  double horizon = 0.0;
};

EventStream build_event_stream(const Window& window, double horizon, const RandomnessPlan& plan);

/// sgn of sum_y j(x,y) s(x) s(y) over the sites linked to x.
int reward(SiteIndex x, const Configuration& config, const Graph& graph, const FeelingMap& feelings);

struct StepRecord {
  double time = 0.0;
  SiteIndex site = 0;
  std::uint32_t arrival = 0;
  Spin decision = 0;
  int reward = 0;
  bool flipped = false;
  bool memory_grew = false;
  bool new_pattern = false;
  int radius = 0;

  bool operator==(const StepRecord&) const = default;
};

using TrajectoryLog = std::vector<StepRecord>;

using StrategyFactory = std::function<std::unique_ptr<Strategy>(SiteIndex)>;

StrategyFactory memory_strategies(MemoryOptions options = {});
StrategyFactory uniform_baseline(BaselineKind kind);

/// Mutable state of one replica: configuration, per-agent strategies and the clock.
class Simulation {
 public:
  Simulation(const Graph& graph, const FeelingMap& feelings, Configuration initial,
             const StrategyFactory& factory, const RandomnessPlan& plan);

  /// Processes one arrival. The event must be later than the current clock.
  StepRecord step(const Event& event);

  const Configuration& configuration() const noexcept { return config_; }
  const Strategy& strategy(SiteIndex x) const { return *strategies_.at(static_cast<std::size_t>(x)); }
  double clock() const noexcept { return clock_; }
  std::size_t events_processed() const noexcept { return processed_; }
  const Graph& graph() const noexcept { return graph_; }
  const FeelingMap& feelings() const noexcept { return feelings_; }

  /// Run every strategy's invariant check after each step.
  void set_invariant_checks(bool on) noexcept { check_ = on; }

  /// Replaces the strategy of one site (used by locality experiments).
  void replace_strategy(SiteIndex x, std::unique_ptr<Strategy> strategy);

 private:
  const Graph& graph_;
  const FeelingMap& feelings_;
  RandomnessPlan plan_;
  Configuration config_;
  std::vector<std::unique_ptr<Strategy>> strategies_;
  double clock_ = 0.0;
  std::size_t processed_ = 0;
  bool check_ = false;
};

/// Coin used by the agent at `site` on its `arrival`-th clock ring.
inline Spin event_coin(const RandomnessPlan& plan, SiteIndex site, std::uint32_t arrival) {
  return plan.fair_spin(Stream::coin, static_cast<std::uint64_t>(site), arrival);
}

struct RunOptions {
  bool check_invariants = false;
  /// Per-site strategy overrides applied after the factory (site, strategy).
  std::function<void(Simulation&)> customize;
};

struct RunResult {
  Configuration initial;
  TrajectoryLog log;
  std::unique_ptr<Simulation> state;
};

/// Full replica: initial configuration and events drawn from `plan`,
/// processed in time order. Rejects horizon <= 0.
RunResult run(const Graph& graph, const FeelingMap& feelings, const StrategyFactory& factory,
              double horizon, const RandomnessPlan& plan, const RunOptions& options = {});

/// CSV: time,site_x1,site_x2,decision,reward,flipped,new_pattern,radius
void write_trajectory_csv(std::ostream& out, const Window& window, const TrajectoryLog& log);

/// Graph text format followed by one "x1 x2 spin" line per site.
void write_state(std::ostream& out, const Graph& graph, const FeelingMap& feelings,
                 const Configuration& config);

}  // namespace lrgame
