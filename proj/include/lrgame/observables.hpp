#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrgame/dynamics.hpp"
#include "lrgame/graph.hpp"

namespace lrgame {

/// sum_{v linked to u} j(u,v) s_u s_v
int local_field(SiteIndex u, const Configuration& config, const Graph& graph, const FeelingMap& feelings);

/// H_region = -sum_{u in region} local_field(u)
long long energy(std::span<const SiteIndex> region, const Configuration& config, const Graph& graph,
                 const FeelingMap& feelings);

/// Change of H over the region if x were flipped in `config` (pre-flip state).
/// `in_region` is indexed by SiteIndex.
long long flip_delta(SiteIndex x, const Configuration& config, const Graph& graph, const FeelingMap& feelings,
                     const std::vector<bool>& in_region);

/// Per-site "last new configuration or loss" time recovered from a log
/// (0 for sites that never had one).
std::vector<double> empirical_T_from_log(const TrajectoryLog& log, int site_count);

enum class EventClass : std::uint8_t { n1, n2, n3, none };

struct SiteFixation {
  int n1 = 0;
  int n2 = 0;
  int n3 = 0;
  int flips = 0;  // M_x
  double last_flip = 0.0;
  double empirical_T = 0.0;
  bool unstabilized = false;  // empirical_T inside the last 10% of the horizon
};

struct FixationReport {
  double horizon = 0.0;
  std::vector<SiteFixation> sites;  // indexed by SiteIndex; frame entries stay zero
  std::vector<EventClass> classes;  // parallel to the log
};

/// Retrospective N1/N2/N3 split of a memory-strategy run, cutting at each
/// site's empirical T. `empirical_T` is indexed by SiteIndex.
FixationReport classify_events(const TrajectoryLog& log, std::span<const double> empirical_T, int site_count,
                               double horizon);

struct EnergyReport {
  std::vector<double> times;
  std::vector<long long> H;
  std::vector<double> e, e1, e2, e3;
  double e0 = 0.0;
  int region_size = 0;
  /// N3 events whose energy change was not <= -1 (symmetric feelings only).
  std::vector<std::size_t> n3_findings;
  /// Log positions where the log's flip delta disagreed with a full recomputation
  /// (only filled when `verify` is requested).
  std::vector<std::size_t> delta_mismatches;
};

/// Replays the log from `initial`, charging each flip's energy change to the
/// event's class. Values are sampled on `grid` (sorted times).
EnergyReport energy_decomposition(const TrajectoryLog& log, const Configuration& initial, const Graph& graph,
                                  const FeelingMap& feelings, const FixationReport& classes,
                                  std::span<const double> grid, bool verify = false);

struct BoundRow {
  double threshold = 0.0;
  double empirical_fraction = 0.0;
  double markov_bound = 0.0;
  double standard_error = 0.0;
  bool pass = false;
};

/// Fraction of sites with |N3| > C against (E rho^2 + E rho^3) / C, allowing
/// three binomial standard errors. `n3` holds one count per sampled site.
std::vector<BoundRow> markov_bound_check(std::span<const int> n3, double rho2, double rho3,
                                         std::span<const double> thresholds);

enum class Deviation { constant_plus, constant_minus, flip };

struct NashResult {
  SiteIndex agent = 0;
  double cut_time = 0.0;  // max empirical T over the agent's box
  int suffix_events = 0;
  int baseline_losses = 0;
  int deviation_losses[3] = {0, 0, 0};  // indexed by Deviation
  bool improving = false;               // some deviation lost strictly less
};

/// Holds every other agent's logged decisions fixed and replays the suffix
/// after the box's empirical T with the agent's own decisions replaced.
/// Throws InvariantViolation if the unmodified replay does not reproduce the log.
NashResult nash_check(const TrajectoryLog& log, const Configuration& initial, const Graph& graph,
                      const FeelingMap& feelings, std::span<const double> empirical_T, SiteIndex agent,
                      int box_radius);

void write_energy_csv(std::ostream& out, const EnergyReport& report);
void write_sites_csv(std::ostream& out, const Graph& graph, const FixationReport& report);
void write_bounds_csv(std::ostream& out, std::span<const BoundRow> rows);

}  // namespace lrgame
