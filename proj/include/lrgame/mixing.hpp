#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "lrgame/dynamics.hpp"
#include "lrgame/graph.hpp"

namespace lrgame {

inline constexpr double kDefaultSubboxExponent = 13.0 / 42.0;

/// Large-deviation rate alpha - 1 - log(alpha) for sums of unit exponentials.
double rate_function(double alpha);

/// Tiling of an L x L box (interior coordinates) into s x s subboxes.
struct SubboxPartition {
  int box_side = 0;
  double rho = kDefaultSubboxExponent;
  int subbox_side = 0;
  int grid = 0;  // subboxes per row
  bool wrap = true;
  double rho_effective = 0.0;  // log(s) / log(L)

  int count() const noexcept { return grid * grid; }
  int subbox_of(Site s) const noexcept { return (s.x1 / subbox_side) * grid + s.x2 / subbox_side; }
  /// Distinct subboxes at grid Chebyshev distance 1 (with wraparound if `wrap`).
  bool neighbors(int a, int b) const noexcept;
  std::vector<int> neighbor_list(int a) const;
};

/// s = max(2, round(L^rho)), lowered to the nearest divisor of L.
/// Throws std::invalid_argument for L < 4 or when no divisor >= 2 exists.
SubboxPartition partition_subboxes(int box_side, double rho = kDefaultSubboxExponent, bool wrap = true);

struct LinkedPair {
  int subbox_a = 0;
  int subbox_b = 0;
  SiteIndex x = 0;  // witness edge, x in subbox_a
  SiteIndex y = 0;
};

/// Every pair of non-neighbouring subboxes joined by an interior edge, once,
/// with the first witness edge found in index order.
std::vector<LinkedPair> find_linked_nonneighbor(const Graph& graph, const SubboxPartition& partition);

inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct CouplingTrajectory {
  double horizon = 0.0;
  /// First disagreement time per SiteIndex (kNever if none).
  std::vector<double> tau;
  /// Blackening time of each subbox under the dominating process.
  std::vector<double> black;
  std::vector<int> subbox;  // per SiteIndex, -1 on the frame
  Configuration first;      // final configurations of the two copies
  Configuration second;
  std::size_t events = 0;

  /// Live snapshots of nu and nu-tilde (interior order) taken while running.
  std::vector<double> grid;
  std::vector<std::vector<std::uint8_t>> nu;
  std::vector<std::vector<std::uint8_t>> nu_tilde;

  bool nu_at(SiteIndex x, double t) const { return t >= tau[static_cast<std::size_t>(x)]; }
  bool nu_tilde_at(SiteIndex x, double t) const;
};

/// Runs two copies that differ only in their frame spins on one graph, one
/// event stream, one set of coins and one interior initial configuration.
/// The graph's window must be pinned; frames are given in frame_sites() order.
CouplingTrajectory coupled_run(const Graph& graph, const FeelingMap& feelings, std::span<const Spin> frame_a,
                               std::span<const Spin> frame_b, const SubboxPartition& partition,
                               const StrategyFactory& factory, double horizon, const RandomnessPlan& plan,
                               int snapshots = 0);

struct MixingParams {
  GraphParams graph;
  bool symmetric = false;
  MemoryOptions memory;
  double rho = kDefaultSubboxExponent;
  /// When set, every replica shares the graph and feelings drawn from this
  /// seed (quenched law); otherwise each replica draws its own (annealed).
  std::optional<std::uint64_t> quenched_seed;
};

struct BoundaryPair {
  std::vector<Spin> first;
  std::vector<Spin> second;
};

/// All-plus frame against all-minus frame for a pinned window of side L.
BoundaryPair opposite_frames(int side);
BoundaryPair identical_frames(int side, Spin value);

/// Samples graph and feelings from `plan`, then runs the coupled pair.
CouplingTrajectory coupled_replica(int side, const BoundaryPair& frames, double horizon, const RandomnessPlan& plan,
                                   const MixingParams& params, int snapshots = 0);

/// First time a subbox meeting `region` turns black; nullopt if never within the horizon.
std::optional<double> black_front_time(const CouplingTrajectory& trajectory, const SubboxPartition& partition,
                                       std::span<const Site> region);

struct TvEstimate {
  double estimate = 0.0;
  double half_width = 0.0;
  int replicas = 0;
};

/// Half the L1 distance between the empirical laws of the region's pattern
/// at time t in the two copies, over `replicas` independent coupled pairs,
/// with a percentile-bootstrap 95% half-width.
TvEstimate tv_estimate(int side, std::span<const Site> region, double t, const BoundaryPair& frames, int replicas,
                       const RandomnessPlan& plan, const MixingParams& params, int bootstrap = 1000);

/// Region pattern codes (bit i set when the i-th site is +1).
std::uint32_t region_code(const Window& window, const Configuration& config, std::span<const Site> region);

/// TV between two samples of pattern codes, plus bootstrap half-width.
TvEstimate tv_from_samples(std::span<const std::uint32_t> first, std::span<const std::uint32_t> second,
                           const RandomnessPlan& plan, int bootstrap);

/// Centred 2 x 2 block of an L x L box.
std::vector<Site> centered_block(int side, int block = 2);

}  // namespace lrgame
