#pragma once

#include <vector>

#include "lrgame/configuration.hpp"
#include "lrgame/graph.hpp"
#include "lrgame/lattice.hpp"

namespace lrgame::test {

// Nearest-neighbour graph on the window (no long-range edges).
inline Graph nn_graph(const Window& w) { return sample_graph(w, {0.0, 9.0}, RandomnessPlan(0)); }

inline Configuration uniform_config(const Window& w, Spin v) {
  Configuration c;
  c.spins.assign(static_cast<std::size_t>(w.site_count()), v);
  return c;
}

inline FeelingMap all_friends(const Graph& g, bool symmetric = true) { return FeelingMap(g, symmetric); }

}  // namespace lrgame::test
