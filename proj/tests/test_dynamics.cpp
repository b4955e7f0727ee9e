#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <algorithm>
#include <sstream>

#include "helpers.hpp"
#include "lrgame/dynamics.hpp"
#include "lrgame/errors.hpp"
#include "lrgame/oracle/oracle.hpp"

using namespace lrgame;

TEST_CASE("event stream") {
  const Window w = Window::torus(32);
  SUBCASE("replayable and sorted") {
    const EventStream a = build_event_stream(w, 3.0, RandomnessPlan(4));
    const EventStream b = build_event_stream(w, 3.0, RandomnessPlan(4));
    CHECK(a.events == b.events);
    for (std::size_t i = 1; i < a.events.size(); ++i) CHECK(a.events[i - 1].time <= a.events[i].time);
  }
  SUBCASE("empty horizon gives no events") {
    CHECK(build_event_stream(w, 0.0, RandomnessPlan(4)).events.empty());
    CHECK(build_event_stream(w, 1e-9, RandomnessPlan(4)).events.size() <= 1u);
  }
  SUBCASE("arrival counts are Poisson") {
    // L=32, horizon 10, 20 seeds: total within 3 Poisson standard deviations of 1024*10 per seed.
    double total = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) total += static_cast<double>(build_event_stream(w, 10.0, RandomnessPlan(s)).events.size());
    const double mean = 1024.0 * 10.0 * 20.0;
    CHECK(std::abs(total - mean) <= 3.0 * std::sqrt(mean));
  }
  SUBCASE("frame sites carry no clock") {
    const Window p = Window::pinned(6, Spin{1});
    for (const Event& e : build_event_stream(p, 5.0, RandomnessPlan(1)).events) CHECK(p.is_interior(e.site));
  }
}

TEST_CASE("reward is the sign of the aligned sum") {
  const Window w = Window::free(5);
  Graph g(w, {}, 0);
  const SiteIndex x = w.index({2, 2}), a = w.index({2, 3}), b = w.index({0, 0});
  g.add_edge(x, a);
  FeelingMap j(g, false);
  Configuration c = test::uniform_config(w, Spin{1});
  CHECK(reward(x, c, g, j) == 1);  // one aligned friend
  c[a] = -1;
  CHECK(reward(x, c, g, j) == -1);  // one anti-aligned friend
  c[a] = 1;
  g.add_edge(x, b);
  FeelingMap j2(g, false);
  j2.set(g, x, b, Spin{-1});
  CHECK(reward(x, c, g, j2) == 0);  // aligned friend and aligned enemy
  CHECK(reward(b, c, g, j2) == 1);  // b's own feeling towards x is still +1
}

namespace {

struct Fixture {
  Window window = Window::torus(6);
  Graph graph = sample_graph(window, {40.0, 3.0}, RandomnessPlan(21));
  FeelingMap feelings = sample_feelings(graph, false, RandomnessPlan(21));
};

}  // namespace

TEST_CASE("simulation") {
  Fixture f;
  SUBCASE("constant strategy drives every visited site to +1") {
    const RunResult r = run(f.graph, f.feelings, uniform_baseline(BaselineKind::constant_plus), 5.0, RandomnessPlan(2));
    for (const auto& s : r.log) CHECK(s.decision == 1);
    for (SiteIndex x : f.window.interior_sites()) {
      const bool visited = std::any_of(r.log.begin(), r.log.end(), [&](const StepRecord& s) { return s.site == x; });
      CHECK(r.state->configuration()[x] == (visited ? 1 : r.initial[x]));
    }
  }
  SUBCASE("same seed gives identical logs") {
    const RunResult a = run(f.graph, f.feelings, memory_strategies(), 20.0, RandomnessPlan(8));
    const RunResult b = run(f.graph, f.feelings, memory_strategies(), 20.0, RandomnessPlan(8));
    CHECK(a.log == b.log);
    std::ostringstream sa, sb;
    write_trajectory_csv(sa, f.window, a.log);
    write_trajectory_csv(sb, f.window, b.log);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("time,site_x1,site_x2,decision,reward,flipped,new_pattern,radius\n", 0) == 0);
  }
  SUBCASE("a window without arrivals keeps its initial configuration") {
    Simulation sim(f.graph, f.feelings, init_configuration(f.window, RandomnessPlan(3)), memory_strategies(),
                   RandomnessPlan(3));
    CHECK(sim.configuration() == init_configuration(f.window, RandomnessPlan(3)));
    CHECK(sim.events_processed() == 0u);
  }
  SUBCASE("logged rewards are post-update rewards") {
    const RunResult r = run(f.graph, f.feelings, memory_strategies(), 10.0, RandomnessPlan(5));
    Configuration c = r.initial;
    for (const auto& s : r.log) {
      CHECK(s.flipped == (c[s.site] != s.decision));
      c[s.site] = s.decision;
      CHECK(s.reward == reward(s.site, c, f.graph, f.feelings));
    }
    CHECK(c == r.state->configuration());
  }
  SUBCASE("events must advance the clock") {
    Simulation sim(f.graph, f.feelings, init_configuration(f.window, RandomnessPlan(3)), memory_strategies(),
                   RandomnessPlan(3));
    sim.step({1.0, f.window.index({0, 0}), 1});
    CHECK_THROWS_AS(sim.step({0.5, f.window.index({1, 0}), 1}), InvariantViolation);
  }
  SUBCASE("non-positive horizon is rejected") {
    CHECK_THROWS_AS(run(f.graph, f.feelings, memory_strategies(), 0.0, RandomnessPlan(1)), std::invalid_argument);
  }
}

TEST_CASE("full run matches the replay oracle on a 3x3 torus") {
  const Window w = Window::torus(3);
  for (bool symmetric : {true, false}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const RandomnessPlan plan(seed);
      const Graph g = sample_graph(w, {1.0, 9.0}, plan);
      const FeelingMap j = sample_feelings(g, symmetric, plan);
      EventStream stream = build_event_stream(w, 10.0, plan);
      stream.events.resize(std::min<std::size_t>(stream.events.size(), 50));
      const Configuration init = init_configuration(w, plan);
      const auto ref = oracle::replay_memory_dynamics(g, j, init, stream.events, plan);
      Simulation sim(g, j, init, memory_strategies(), plan);
      for (std::size_t k = 0; k < stream.events.size(); ++k) {
        const StepRecord s = sim.step(stream.events[k]);
        CHECK(s.decision == ref.steps[k].decision);
        CHECK(s.reward == ref.steps[k].reward);
      }
      CHECK(sim.configuration() == ref.final_config);
    }
  }
}

TEST_CASE("replacing one agent's strategy changes nothing before that agent acts") {
  Fixture f;
  const SiteIndex target = f.window.index({3, 3});
  const RunResult base = run(f.graph, f.feelings, memory_strategies(), 30.0, RandomnessPlan(6));
  RunOptions opts;
  opts.customize = [&](Simulation& sim) { sim.replace_strategy(target, baseline_strategy(BaselineKind::constant_minus)); };
  const RunResult alt = run(f.graph, f.feelings, memory_strategies(), 30.0, RandomnessPlan(6), opts);
  REQUIRE(base.log.size() == alt.log.size());
  std::size_t first_diff = base.log.size();
  for (std::size_t k = 0; k < base.log.size(); ++k) {
    CHECK(base.log[k].time == alt.log[k].time);
    CHECK(base.log[k].site == alt.log[k].site);
    if (first_diff == base.log.size() && !(base.log[k] == alt.log[k])) first_diff = k;
  }
  REQUIRE(first_diff < base.log.size());
  CHECK(base.log[first_diff].site == target);
  for (std::size_t k = 0; k < first_diff; ++k) CHECK(base.log[k].site != target);
}
