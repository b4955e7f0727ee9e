#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "lrgame/dynamics.hpp"
#include "lrgame/observables.hpp"
#include "lrgame/errors.hpp"
#include "lrgame/oracle/oracle.hpp"

using namespace lrgame;

namespace {

std::vector<SiteIndex> interior(const Window& w) { return {w.interior_sites().begin(), w.interior_sites().end()}; }

StepRecord step(double t, SiteIndex x, Spin u, int h, bool flipped, bool new_pattern = false) {
  StepRecord r;
  r.time = t;
  r.site = x;
  r.decision = u;
  r.reward = h;
  r.flipped = flipped;
  r.new_pattern = new_pattern;
  return r;
}

}  // namespace

TEST_CASE("local field and energy on a 3x3 friends torus") {
  const Window w = Window::torus(3);
  const Graph g = test::nn_graph(w);
  const FeelingMap j = test::all_friends(g);
  Configuration c = test::uniform_config(w, Spin{1});
  const auto all = interior(w);
  for (SiteIndex x : all) CHECK(local_field(x, c, g, j) == 4);
  CHECK(energy(all, c, g, j) == -36);
  CHECK(energy(std::span<const SiteIndex>{}, c, g, j) == 0);

  const SiteIndex u = w.index({1, 1});
  c[u] = -1;
  CHECK(local_field(u, c, g, j) == -4);
  for (SiteIndex y : g.neighbors(u)) CHECK(local_field(y, c, g, j) == 2);
  CHECK(energy(all, c, g, j) == -20);
  CHECK(oracle::brute_energy(c, g, j) == -20);
}

TEST_CASE("flip delta matches recomputed energy") {
  for (bool symmetric : {true, false}) {
    const Window w = Window::pinned(5, Spin{-1});
    const Graph g = sample_graph(w, {30.0, 3.0}, RandomnessPlan(3));
    const FeelingMap j = sample_feelings(g, symmetric, RandomnessPlan(3));
    const auto all = interior(w);
    std::vector<bool> in(static_cast<std::size_t>(w.site_count()), false);
    for (SiteIndex x : all) in[static_cast<std::size_t>(x)] = true;
    Configuration c = init_configuration(w, RandomnessPlan(4));
    for (SiteIndex x : all) {
      const long long before = energy(all, c, g, j);
      const long long delta = flip_delta(x, c, g, j, in);
      c[x] = static_cast<Spin>(-c[x]);
      CHECK(energy(all, c, g, j) - before == delta);
    }
  }
}

TEST_CASE("event classification") {
  const int n = 4;
  const std::vector<double> T = {5.0, 5.0, 5.0, 5.0};
  TrajectoryLog log = {
      step(1.0, 0, 1, 1, true, true),    // new pattern before T -> N2
      step(2.0, 0, -1, -1, true),        // known pattern, loss, before T -> N1
      step(3.0, 0, -1, 1, false),        // known, no loss -> N2
      step(6.0, 0, 1, 1, true),          // flip after T -> N3
      step(7.0, 0, 1, 1, false),         // no flip after T -> none
      step(4.0, 1, 1, -1, false, true),  // new pattern with loss -> N2
  };
  const FixationReport r = classify_events(log, T, n, 10.0);
  CHECK(r.classes[0] == EventClass::n2);
  CHECK(r.classes[1] == EventClass::n1);
  CHECK(r.classes[2] == EventClass::n2);
  CHECK(r.classes[3] == EventClass::n3);
  CHECK(r.classes[4] == EventClass::none);
  CHECK(r.classes[5] == EventClass::n2);
  CHECK(r.sites[0].n1 == 1);
  CHECK(r.sites[0].n2 == 2);
  CHECK(r.sites[0].n3 == 1);
  CHECK(r.sites[0].flips == 3);
  CHECK(r.sites[0].last_flip == 6.0);
  CHECK_THROWS_AS(classify_events(log, std::vector<double>{1.0}, n, 10.0), std::invalid_argument);
}

TEST_CASE("energy decomposition") {
  const Window w = Window::torus(8);
  const Graph g = sample_graph(w, {1.0, 9.0}, RandomnessPlan(13));
  std::vector<double> grid;
  for (int k = 0; k <= 40; ++k) grid.push_back(k * 1.0);

  SUBCASE("no flips leave the energy flat") {
    const FeelingMap j = sample_feelings(g, true, RandomnessPlan(13));
    const Configuration plus = test::uniform_config(w, Spin{1});
    Simulation sim(g, j, plus, uniform_baseline(BaselineKind::constant_plus), RandomnessPlan(1));
    TrajectoryLog log;
    for (const Event& ev : build_event_stream(w, 40.0, RandomnessPlan(1)).events) log.push_back(sim.step(ev));
    REQUIRE_FALSE(log.empty());
    for (const auto& s : log) CHECK_FALSE(s.flipped);
    const auto T = empirical_T_from_log(log, w.site_count());
    const FixationReport cls = classify_events(log, T, w.site_count(), 40.0);
    const EnergyReport e = energy_decomposition(log, plus, g, j, cls, grid);
    for (std::size_t i = 0; i < e.e.size(); ++i) {
      CHECK(e.e[i] == e.e0);
      CHECK(e.e1[i] == 0.0);
      CHECK(e.e2[i] == 0.0);
      CHECK(e.e3[i] == 0.0);
    }
  }
  SUBCASE("components add up and deltas agree with recomputation") {
    for (bool symmetric : {true, false}) {
      const FeelingMap j = sample_feelings(g, symmetric, RandomnessPlan(13));
      const RunResult r = run(g, j, memory_strategies(), 40.0, RandomnessPlan(2));
      const auto T = empirical_T_from_log(r.log, w.site_count());
      const FixationReport cls = classify_events(r.log, T, w.site_count(), 40.0);
      const EnergyReport e = energy_decomposition(r.log, r.initial, g, j, cls, grid, true);
      CHECK(e.delta_mismatches.empty());
      REQUIRE(e.times.size() == grid.size());
      for (std::size_t i = 0; i < e.e.size(); ++i) {
        CHECK(e.e[i] == doctest::Approx(e.e0 + e.e1[i] + e.e2[i] + e.e3[i]));
      }
      std::ostringstream out;
      write_energy_csv(out, e);
      CHECK(out.str().rfind("time,H,e,e1,e2,e3\n", 0) == 0);
    }
  }
}

TEST_CASE("Markov tail bound rows") {
  const std::vector<int> n3 = {0, 0, 1, 12, 30, 60};
  const std::vector<double> thresholds = {10.0, 20.0, 50.0, 1e9};
  const auto rows = markov_bound_check(n3, 1.5, 2.5, thresholds);
  CHECK(rows[0].empirical_fraction == doctest::Approx(3.0 / 6.0));
  CHECK(rows[0].markov_bound == doctest::Approx(0.4));
  CHECK(rows[1].empirical_fraction == doctest::Approx(2.0 / 6.0));
  CHECK(rows[2].empirical_fraction == doctest::Approx(1.0 / 6.0));
  CHECK(rows[3].empirical_fraction == 0.0);
  CHECK(rows[3].markov_bound < 1e-8);
  CHECK(rows[3].pass);
  std::ostringstream out;
  write_bounds_csv(out, rows);
  CHECK(out.str().rfind("C,empirical_fraction,markov_bound\n10,0.5,0.4\n", 0) == 0);
}

TEST_CASE("Nash check") {
  SUBCASE("an agent whose field always vanishes cannot change its losses") {
    // Agent with one friend and one enemy that always agree: every reward is 0.
    const Window w = Window::free(3);
    Graph g(w, {}, 0);
    const SiteIndex a = w.index({1, 1}), f = w.index({0, 1}), e = w.index({2, 1});
    g.add_edge(a, f);
    g.add_edge(a, e);
    FeelingMap j(g, false);
    j.set(g, a, e, Spin{-1});
    const Configuration init = test::uniform_config(w, Spin{1});
    TrajectoryLog log = {step(1.0, a, 1, 0, false), step(2.0, a, -1, 0, true), step(3.0, a, 1, 0, true)};
    const std::vector<double> T(static_cast<std::size_t>(w.site_count()), 0.0);
    const NashResult r = nash_check(log, init, g, j, T, a, 0);
    CHECK(r.suffix_events == 3);
    CHECK(r.baseline_losses == 0);
    for (int d = 0; d < 3; ++d) CHECK(r.deviation_losses[d] == 0);
    CHECK_FALSE(r.improving);
  }
  SUBCASE("simulated agents after the cut are loss-free and cannot improve") {
    const Window w = Window::torus(8);
    const Graph g = sample_graph(w, {1.0, 9.0}, RandomnessPlan(7));
    const FeelingMap j = sample_feelings(g, false, RandomnessPlan(7));
    const RunResult r = run(g, j, memory_strategies(), 60.0, RandomnessPlan(7));
    const auto T = empirical_T_from_log(r.log, w.site_count());
    for (SiteIndex a : w.interior_sites()) {
      const NashResult n = nash_check(r.log, r.initial, g, j, T, a, 1);
      CHECK(n.baseline_losses == 0);
      CHECK(n.cut_time >= T[static_cast<std::size_t>(a)]);
      CHECK_FALSE(n.improving);
    }
  }
  SUBCASE("a tampered log is a replay violation") {
    const Window w = Window::torus(4);
    const Graph g = test::nn_graph(w);
    const FeelingMap j = test::all_friends(g);
    const RunResult r = run(g, j, memory_strategies(), 10.0, RandomnessPlan(1));
    TrajectoryLog log = r.log;
    REQUIRE_FALSE(log.empty());
    log.back().reward = log.back().reward == 1 ? -1 : 1;
    const std::vector<double> T(static_cast<std::size_t>(w.site_count()), 0.0);
    CHECK_THROWS_AS(nash_check(log, r.initial, g, j, T, log.back().site, 0), InvariantViolation);
  }
}

TEST_CASE("sites CSV lists every interior site") {
  const Window w = Window::torus(4);
  const Graph g = test::nn_graph(w);
  const FeelingMap j = test::all_friends(g);
  const RunResult r = run(g, j, memory_strategies(), 5.0, RandomnessPlan(1));
  const auto T = empirical_T_from_log(r.log, w.site_count());
  std::ostringstream out;
  write_sites_csv(out, g, classify_events(r.log, T, w.site_count(), 5.0));
  const std::string s = out.str();
  CHECK(s.rfind("site,N1,N2,N3,M,last_flip,empirical_T,rho,degree\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 17);
}
