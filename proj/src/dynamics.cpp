#include "lrgame/dynamics.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lrgame/errors.hpp"

namespace lrgame {

Configuration init_configuration(const Window& window, const RandomnessPlan& plan) {
  Configuration config;
  config.spins.assign(static_cast<std::size_t>(window.site_count()), Spin{1});
  for (SiteIndex x : window.interior_sites()) {
    config[x] = plan.fair_spin(Stream::init, static_cast<std::uint64_t>(x));
  }
  const auto frame = window.frame_sites();
  const auto pinned = window.pinned_values();
  for (std::size_t i = 0; i < pinned.size(); ++i) config[frame[i]] = pinned[i];
  return config;
}

EventStream build_event_stream(const Window& window, double horizon, const RandomnessPlan& plan) {
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
  EventStream stream;
  stream.horizon = horizon;
  for (SiteIndex x : window.interior_sites()) {
    double t = 0.0;
    for (std::uint32_t n = 1;; ++n) {
      t += plan.exponential(Stream::clock, static_cast<std::uint64_t>(x), n);
      if (t > horizon) break;
      stream.events.push_back({t, x, n});
    }
  }
  std::sort(stream.events.begin(), stream.events.end(), [](const Event& a, const Event& b) {
    return a.time != b.time ? a.time < b.time : a.site < b.site;
  });
  return stream;
}

int reward(SiteIndex x, const Configuration& config, const Graph& graph, const FeelingMap& feelings) {
  const auto adj = graph.neighbors(x);
  int sum = 0;
  for (std::size_t k = 0; k < adj.size(); ++k) {
    sum += feelings.at(x, static_cast<int>(k)) * config[adj[k]];
  }
  sum *= config[x];
  return (sum > 0) - (sum < 0);
}

StrategyFactory memory_strategies(MemoryOptions options) {
  return [options](SiteIndex) { return std::make_unique<MemoryStrategy>(options); };
}

StrategyFactory uniform_baseline(BaselineKind kind) {
  return [kind](SiteIndex) { return baseline_strategy(kind); };
}

Simulation::Simulation(const Graph& graph, const FeelingMap& feelings, Configuration initial,
                       const StrategyFactory& factory, const RandomnessPlan& plan)
    : graph_(graph), feelings_(feelings), plan_(plan), config_(std::move(initial)) {
  if (config_.size() != static_cast<std::size_t>(graph.window().site_count())) {
    throw std::invalid_argument("configuration does not match the window");
  }
  strategies_.resize(config_.size());
  for (SiteIndex x : graph.window().interior_sites()) strategies_[x] = factory(x);
}

void Simulation::replace_strategy(SiteIndex x, std::unique_ptr<Strategy> strategy) {
  if (!graph_.window().is_interior(x)) throw std::invalid_argument("only interior sites have strategies");
  strategies_.at(static_cast<std::size_t>(x)) = std::move(strategy);
}

StepRecord Simulation::step(const Event& event) {
  if (event.time <= clock_ && processed_ > 0) {
    throw InvariantViolation("event-order", "event at " + std::to_string(event.time) + " not after clock " +
                                                std::to_string(clock_));
  }
  Strategy& strategy = *strategies_.at(static_cast<std::size_t>(event.site));
  const DecisionContext ctx{graph_.window(), graph_,      feelings_,
                            config_,         event.site,  event.time,
                            event.arrival,   event_coin(plan_, event.site, event.arrival),
                            config_[event.site]};
  const Spin previous = config_[event.site];
  const Spin u = strategy.decide(ctx);
  config_[event.site] = u;
  const int h = reward(event.site, config_, graph_, feelings_);
  const Feedback fb = strategy.observe(ctx, u, h);
  if (check_) strategy.check_invariants();

  clock_ = event.time;
  ++processed_;
  return {event.time, event.site, event.arrival, u, h, u != previous, fb.memory_grew, fb.new_pattern, fb.radius};
}

RunResult run(const Graph& graph, const FeelingMap& feelings, const StrategyFactory& factory,
              double horizon, const RandomnessPlan& plan, const RunOptions& options) {
  if (!(horizon > 0.0)) throw std::invalid_argument("run: horizon must be positive");
  RunResult result;
  result.initial = init_configuration(graph.window(), plan);
  result.state = std::make_unique<Simulation>(graph, feelings, result.initial, factory, plan);
  result.state->set_invariant_checks(options.check_invariants);
  if (options.customize) options.customize(*result.state);

  const EventStream stream = build_event_stream(graph.window(), horizon, plan);
  result.log.reserve(stream.events.size());
  for (const Event& e : stream.events) result.log.push_back(result.state->step(e));
  return result;
}

void write_trajectory_csv(std::ostream& out, const Window& window, const TrajectoryLog& log) {
  out << "time,site_x1,site_x2,decision,reward,flipped,new_pattern,radius\n";
  out << std::setprecision(17);
  for (const auto& r : log) {
    const Site s = window.site(r.site);
    out << r.time << ',' << s.x1 << ',' << s.x2 << ',' << static_cast<int>(r.decision) << ',' << r.reward << ','
        << (r.flipped ? 1 : 0) << ',' << (r.new_pattern ? 1 : 0) << ',' << r.radius << '\n';
  }
}

void write_state(std::ostream& out, const Graph& graph, const FeelingMap& feelings,
                 const Configuration& config) {
  write_graph(out, graph, feelings);
  const Window& w = graph.window();
  for (SiteIndex x = 0; x < w.site_count(); ++x) {
    const Site s = w.site(x);
    out << s.x1 << ' ' << s.x2 << ' ' << static_cast<int>(config[x]) << '\n';
  }
}

}  // namespace lrgame
