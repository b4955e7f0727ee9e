#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "lrgame/lattice.hpp"
#include "lrgame/random.hpp"

namespace lrgame {

inline constexpr double kDefaultC = 1.0;
inline constexpr double kDefaultGamma = 9.0;

struct GraphParams {
  double C = kDefaultC;
  double gamma = kDefaultGamma;
};

/// Linking probability for two distinct sites at L1 distance `distance`:
/// 1 for nearest neighbours, min(1, C / d^gamma) beyond.
double edge_probability(int distance, double C, double gamma);
double edge_probability(const Window& window, Site x, Site y, double C, double gamma);

/// Undirected graph on the extended grid of a window. Adjacency lists are
/// sorted by site index.
class Graph {
 public:
  /// Empty graph (no edges) on the window.
  Graph(Window window, GraphParams params, std::uint64_t seed);
  Graph(Window window, GraphParams params, std::uint64_t seed,
        std::vector<std::vector<SiteIndex>> adjacency);

  const Window& window() const noexcept { return window_; }
  const GraphParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<const SiteIndex> neighbors(SiteIndex x) const noexcept { return adjacency_[x]; }
  int degree(SiteIndex x) const noexcept { return static_cast<int>(adjacency_[x].size()); }
  bool linked(SiteIndex x, SiteIndex y) const noexcept;
  /// Position of x inside y's adjacency list, for the k-th neighbour y of x.
  int reverse_slot(SiteIndex x, int k) const noexcept { return reverse_[x][k]; }
  std::size_t edge_count() const noexcept;

  /// Inserts {x, y}; no-op when present. Used by importers and tests.
  void add_edge(SiteIndex x, SiteIndex y);

  /// Every unordered edge once, as (smaller index, larger index).
  std::vector<std::pair<SiteIndex, SiteIndex>> edges() const;

 private:
  void rebuild_reverse();

  Window window_;
  GraphParams params_;
  std::uint64_t seed_;
  std::vector<std::vector<SiteIndex>> adjacency_;
  std::vector<std::vector<int>> reverse_;
};

/// Includes each unordered pair independently with its edge probability.
/// Each pair draws from its own keyed variate (smaller index first), so the
/// result depends only on (window, params, seed).
Graph sample_graph(const Window& window, GraphParams params, const RandomnessPlan& plan);

/// j(x, y) in {-1, +1}, stored parallel to the graph's adjacency lists.
class FeelingMap {
 public:
  FeelingMap(const Graph& graph, bool symmetric);

  bool symmetric() const noexcept { return symmetric_; }
  /// Feeling of x towards its k-th neighbour.
  Spin at(SiteIndex x, int k) const noexcept { return j_[x][k]; }
  void set(SiteIndex x, int k, Spin value) { j_[x][k] = value; }
  /// j(x, y); 0 when {x, y} is not an edge.
  Spin operator()(const Graph& graph, SiteIndex x, SiteIndex y) const noexcept;
  void set(const Graph& graph, SiteIndex x, SiteIndex y, Spin value);

 private:
  bool symmetric_;
  std::vector<std::vector<Spin>> j_;
};

FeelingMap sample_feelings(const Graph& graph, bool symmetric, const RandomnessPlan& plan);

/// Length of the longest edge at x.
int rho(const Graph& graph, SiteIndex x);

struct DegreeStats {
  int sites = 0;
  double mean_degree = 0.0;
  /// Empirical E[rho^k], k = 1..5, over interior sites.
  std::array<double, 5> rho_moment{};
  /// Standard error of each moment estimate.
  std::array<double, 5> rho_moment_se{};
};

DegreeStats degree_stats(const Graph& graph);

/// Line format: "L boundary C gamma seed" header, then one
/// "x1 x2 y1 y2 j_xy j_yx" line per edge.
void write_graph(std::ostream& out, const Graph& graph, const FeelingMap& feelings);
std::pair<Graph, FeelingMap> read_graph(std::istream& in);

}  // namespace lrgame
