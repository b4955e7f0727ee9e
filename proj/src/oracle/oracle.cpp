#include "lrgame/oracle/oracle.hpp"

#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

namespace lrgame::oracle {

namespace {

std::set<std::pair<SiteIndex, SiteIndex>> edge_set(const Graph& graph) {
  std::set<std::pair<SiteIndex, SiteIndex>> edges;
  for (auto [x, y] : graph.edges()) {
    edges.emplace(x, y);
    edges.emplace(y, x);
  }
  return edges;
}

int sgn(int v) { return (v > 0) - (v < 0); }

}  // namespace

int brute_reward(SiteIndex x, const Configuration& config, const Graph& graph, const FeelingMap& feelings) {
  const auto edges = edge_set(graph);
  int sum = 0;
  for (SiteIndex y = 0; y < graph.window().site_count(); ++y) {
    if (y == x || !edges.contains({x, y})) continue;
    sum += feelings(graph, x, y) * config[x] * config[y];
  }
  return sgn(sum);
}

long long brute_energy(const Configuration& config, const Graph& graph, const FeelingMap& feelings) {
  const Window& w = graph.window();
  long long h = 0;
  for (auto [x, y] : graph.edges()) {
    if (w.is_interior(x)) h -= feelings(graph, x, y) * config[x] * config[y];
    if (w.is_interior(y)) h -= feelings(graph, y, x) * config[y] * config[x];
  }
  return h;
}

namespace {

// Ball pattern as (radius, spins) with 0 marking cells off the grid.
using Key = std::pair<int, std::vector<int>>;

Key ball(const Window& w, const Configuration& config, SiteIndex center, int radius, Spin center_spin) {
  const Site c = w.site(center);
  std::vector<int> cells;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (std::abs(dx) + std::abs(dy) > radius) continue;
      Site s{c.x1 + dx, c.x2 + dy};
      if (w.boundary() == Boundary::torus) {
        const int L = w.side();
        s.x1 = ((s.x1 % L) + L) % L;
        s.x2 = ((s.x2 % L) + L) % L;
      } else if (!w.on_grid(s)) {
        cells.push_back(0);
        continue;
      }
      const SiteIndex i = w.index(s);
      cells.push_back(i == center ? center_spin : config[i]);
    }
  }
  return {radius, std::move(cells)};
}

struct Agent {
  std::map<Key, std::pair<Spin, int>> memory;
  int radius = 0;
  Spin last = 0;
  bool started = false;
};

}  // namespace

ReplayResult replay_memory_dynamics(const Graph& graph, const FeelingMap& feelings, const Configuration& initial,
                                    const std::vector<Event>& events, const RandomnessPlan& plan, bool coin_on_miss) {
  const Window& w = graph.window();
  ReplayResult out;
  out.final_config = initial;
  Configuration& config = out.final_config;
  std::map<SiteIndex, Agent> agents;

  for (const Event& e : events) {
    Agent& a = agents[e.site];
    const Spin before = config[e.site];
    const Spin coin = plan.fair_spin(Stream::coin, static_cast<std::uint64_t>(e.site), e.arrival);
    Spin u;
    enum { first, hit, miss } branch;
    Key seen;
    if (!a.started) {
      branch = first;
      u = coin;
    } else {
      seen = ball(w, config, e.site, a.radius, before);
      auto it = a.memory.find(seen);
      if (it != a.memory.end()) {
        branch = hit;
        const auto [u_old, h_old] = it->second;
        u = static_cast<Spin>(h_old == 0 ? u_old : u_old * sgn(h_old));
      } else {
        branch = miss;
        u = coin_on_miss ? coin : a.last;
      }
    }
    config[e.site] = u;
    const int h = brute_reward(e.site, config, graph, feelings);
    auto store = [&](Key key) {
      if (!a.memory.emplace(std::move(key), std::make_pair(u, h)).second) {
        throw std::logic_error("oracle: duplicate memory key");
      }
    };
    if (branch == first) {
      store(ball(w, config, e.site, 1, before));
      a.radius = 1;
      a.started = true;
    } else if (branch == hit && h < 0) {
      store(ball(w, config, e.site, a.radius + 1, before));
      a.radius += 1;
    } else if (branch == miss) {
      store(std::move(seen));
    }
    a.last = u;
    out.steps.push_back({u, h});
  }
  return out;
}

}  // namespace lrgame::oracle

namespace lrgame::oracle {

CheckResult check_reward_energy(int side, int trials, std::uint64_t seed, GraphParams params, bool symmetric) {
  CheckResult result;
  const Window window = Window::torus(side);
  const auto region = window.interior_sites();
  for (int k = 0; k < trials; ++k) {
    const RandomnessPlan plan = RandomnessPlan(seed).replica(static_cast<std::uint64_t>(k));
    const Graph graph = sample_graph(window, params, plan);
    const FeelingMap feelings = sample_feelings(graph, symmetric, plan);
    const Configuration config = init_configuration(window, plan);
    bool ok = true;
    long long h = 0;
    for (SiteIndex x : region) {
      ok = ok && reward(x, config, graph, feelings) == brute_reward(x, config, graph, feelings);
      int field = 0;
      for (SiteIndex y : graph.neighbors(x)) field += feelings(graph, x, y) * config[x] * config[y];
      h -= field;
    }
    ok = ok && brute_energy(config, graph, feelings) == h;
    ok = ok && [&] {
      long long lib = 0;
      for (SiteIndex x : region) {
        const auto adj = graph.neighbors(x);
        for (std::size_t j = 0; j < adj.size(); ++j) lib -= feelings.at(x, static_cast<int>(j)) * config[x] * config[adj[j]];
      }
      return lib == h;
    }();
    ++result.trials;
    if (!ok) ++result.mismatches;
  }
  return result;
}

CheckResult check_replay(int side, int seeds, int events, std::uint64_t seed, GraphParams params, bool symmetric) {
  CheckResult result;
  const Window window = Window::torus(side);
  for (int k = 0; k < seeds; ++k) {
    const RandomnessPlan plan = RandomnessPlan(seed).replica(static_cast<std::uint64_t>(k));
    const Graph graph = sample_graph(window, params, plan);
    const FeelingMap feelings = sample_feelings(graph, symmetric, plan);
    const Configuration initial = init_configuration(window, plan);
    // Long enough horizon for `events` arrivals on a small window.
    EventStream stream = build_event_stream(window, 4.0 * events / window.interior_count() + 10.0, plan);
    if (stream.events.size() > static_cast<std::size_t>(events)) stream.events.resize(static_cast<std::size_t>(events));

    Simulation sim(graph, feelings, initial, memory_strategies(), plan);
    std::vector<StepRecord> steps;
    for (const Event& e : stream.events) steps.push_back(sim.step(e));
    const ReplayResult ref = replay_memory_dynamics(graph, feelings, initial, stream.events, plan);

    bool ok = steps.size() == ref.steps.size() && sim.configuration() == ref.final_config;
    for (std::size_t i = 0; ok && i < steps.size(); ++i) {
      ok = steps[i].decision == ref.steps[i].decision && steps[i].reward == ref.steps[i].reward;
    }
    ++result.trials;
    if (!ok) ++result.mismatches;
  }
  return result;
}

}  // namespace lrgame::oracle
