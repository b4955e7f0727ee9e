#include "lrgame/observables.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lrgame/errors.hpp"

namespace lrgame {

int local_field(SiteIndex u, const Configuration& config, const Graph& graph, const FeelingMap& feelings) {
  const auto adj = graph.neighbors(u);
  int sum = 0;
  for (std::size_t k = 0; k < adj.size(); ++k) sum += feelings.at(u, static_cast<int>(k)) * config[adj[k]];
  return sum * config[u];
}

long long energy(std::span<const SiteIndex> region, const Configuration& config, const Graph& graph,
                 const FeelingMap& feelings) {
  long long h = 0;
  for (SiteIndex u : region) h -= local_field(u, config, graph, feelings);
  return h;
}

long long flip_delta(SiteIndex x, const Configuration& config, const Graph& graph, const FeelingMap& feelings,
                     const std::vector<bool>& in_region) {
  // Terms of H touching x are -j(x,y) s_x s_y (x in region) and
  // -j(y,x) s_y s_x (y in region); flipping x negates all of them.
  const auto adj = graph.neighbors(x);
  const bool x_in = in_region[static_cast<std::size_t>(x)];
  long long sum = 0;
  for (std::size_t k = 0; k < adj.size(); ++k) {
    const SiteIndex y = adj[k];
    int weight = 0;
    if (x_in) weight += feelings.at(x, static_cast<int>(k));
    if (in_region[static_cast<std::size_t>(y)]) weight += feelings.at(y, graph.reverse_slot(x, static_cast<int>(k)));
    sum += weight * config[y];
  }
  return 2 * config[x] * sum;
}

std::vector<double> empirical_T_from_log(const TrajectoryLog& log, int site_count) {
  std::vector<double> t(static_cast<std::size_t>(site_count), 0.0);
  for (const auto& r : log) {
    if (r.new_pattern || r.memory_grew || r.reward < 0) t[static_cast<std::size_t>(r.site)] = r.time;
  }
  return t;
}

FixationReport classify_events(const TrajectoryLog& log, std::span<const double> empirical_T, int site_count,
                               double horizon) {
  if (empirical_T.size() != static_cast<std::size_t>(site_count)) {
    throw std::invalid_argument("classify_events: one empirical T per site required");
  }
  FixationReport report;
  report.horizon = horizon;
  report.sites.resize(static_cast<std::size_t>(site_count));
  report.classes.reserve(log.size());
  for (std::size_t x = 0; x < report.sites.size(); ++x) {
    report.sites[x].empirical_T = empirical_T[x];
    report.sites[x].unstabilized = empirical_T[x] > 0.9 * horizon;
  }
  for (const auto& r : log) {
    SiteFixation& s = report.sites[static_cast<std::size_t>(r.site)];
    EventClass c = EventClass::none;
    if (r.time <= s.empirical_T) {
      if (!r.new_pattern && r.reward < 0) {
        c = EventClass::n1;
        ++s.n1;
      } else {
        c = EventClass::n2;
        ++s.n2;
      }
    } else if (r.flipped) {
      c = EventClass::n3;
      ++s.n3;
    }
    if (r.flipped) {
      ++s.flips;
      s.last_flip = r.time;
    }
    report.classes.push_back(c);
  }
  return report;
}

EnergyReport energy_decomposition(const TrajectoryLog& log, const Configuration& initial, const Graph& graph,
                                  const FeelingMap& feelings, const FixationReport& classes,
                                  std::span<const double> grid, bool verify) {
  if (classes.classes.size() != log.size()) throw std::invalid_argument("energy_decomposition: classes do not match log");
  const Window& window = graph.window();
  const auto region = window.interior_sites();
  std::vector<bool> in_region(static_cast<std::size_t>(window.site_count()), false);
  for (SiteIndex x : region) in_region[static_cast<std::size_t>(x)] = true;

  EnergyReport report;
  report.region_size = static_cast<int>(region.size());
  const double norm = static_cast<double>(region.size());
  Configuration config = initial;
  long long H = energy(region, config, graph, feelings);
  report.e0 = static_cast<double>(H) / norm;
  long long acc[3] = {0, 0, 0};

  std::size_t g = 0;
  auto sample_until = [&](double t) {
    while (g < grid.size() && grid[g] < t) {
      report.times.push_back(grid[g]);
      report.H.push_back(H);
      report.e.push_back(static_cast<double>(H) / norm);
      report.e1.push_back(static_cast<double>(acc[0]) / norm);
      report.e2.push_back(static_cast<double>(acc[1]) / norm);
      report.e3.push_back(static_cast<double>(acc[2]) / norm);
      ++g;
    }
  };

  for (std::size_t i = 0; i < log.size(); ++i) {
    const StepRecord& r = log[i];
    sample_until(r.time);
    if (r.flipped) {
      const long long delta = flip_delta(r.site, config, graph, feelings, in_region);
      config[r.site] = r.decision;
      H += delta;
      const EventClass c = classes.classes[i];
      if (c != EventClass::none) acc[static_cast<int>(c)] += delta;
      if (c == EventClass::n3 && feelings.symmetric() && delta > -1) report.n3_findings.push_back(i);
      if (verify && energy(region, config, graph, feelings) != H) report.delta_mismatches.push_back(i);
    } else {
      config[r.site] = r.decision;
    }
  }
  sample_until(std::numeric_limits<double>::infinity());
  return report;
}

std::vector<BoundRow> markov_bound_check(std::span<const int> n3, double rho2, double rho3,
                                         std::span<const double> thresholds) {
  std::vector<BoundRow> rows;
  const double n = static_cast<double>(n3.size());
  for (double c : thresholds) {
    if (!(c > 0.0)) throw std::invalid_argument("markov_bound_check: thresholds must be positive");
    BoundRow row;
    row.threshold = c;
    const auto above = std::count_if(n3.begin(), n3.end(), [c](int v) { return v > c; });
    row.empirical_fraction = n > 0 ? static_cast<double>(above) / n : 0.0;
    row.markov_bound = (rho2 + rho3) / c;
    row.standard_error = n > 0 ? std::sqrt(row.empirical_fraction * (1.0 - row.empirical_fraction) / n) : 0.0;
    row.pass = row.empirical_fraction <= row.markov_bound + 3.0 * row.standard_error;
    rows.push_back(row);
  }
  return rows;
}

namespace {

Spin deviate(Deviation d, Spin original) {
  switch (d) {
    case Deviation::constant_plus:
      return 1;
    case Deviation::constant_minus:
      return -1;
    case Deviation::flip:
      return static_cast<Spin>(-original);
  }
  return original;
}

}  // namespace

NashResult nash_check(const TrajectoryLog& log, const Configuration& initial, const Graph& graph,
                      const FeelingMap& feelings, std::span<const double> empirical_T, SiteIndex agent,
                      int box_radius) {
  const Window& window = graph.window();
  if (!window.is_interior(agent)) throw std::invalid_argument("nash_check: agent must be an interior site");

  NashResult result;
  result.agent = agent;
  for (int dx = -box_radius; dx <= box_radius; ++dx) {
    for (int dy = -box_radius; dy <= box_radius; ++dy) {
      const auto y = window.shifted(agent, dx, dy);
      if (y && window.is_interior(*y)) result.cut_time = std::max(result.cut_time, empirical_T[static_cast<std::size_t>(*y)]);
    }
  }

  auto mismatch = [](std::size_t i) {
    return InvariantViolation("replay-determinism", "replayed reward differs from the log at event " + std::to_string(i));
  };

  Configuration at_cut = initial;
  std::size_t split = 0;
  for (; split < log.size() && log[split].time <= result.cut_time; ++split) {
    const StepRecord& r = log[split];
    at_cut[r.site] = r.decision;
    if (reward(r.site, at_cut, graph, feelings) != r.reward) throw mismatch(split);
  }

  // Baseline replay must reproduce every logged reward.
  {
    Configuration config = at_cut;
    for (std::size_t i = split; i < log.size(); ++i) {
      const StepRecord& r = log[i];
      config[r.site] = r.decision;
      const int h = reward(r.site, config, graph, feelings);
      if (h != r.reward) throw mismatch(i);
      if (r.site == agent) {
        ++result.suffix_events;
        if (h < 0) ++result.baseline_losses;
      }
    }
  }

  for (Deviation d : {Deviation::constant_plus, Deviation::constant_minus, Deviation::flip}) {
    Configuration config = at_cut;
    int losses = 0;
    for (std::size_t i = split; i < log.size(); ++i) {
      const StepRecord& r = log[i];
      if (r.site == agent) {
        config[r.site] = deviate(d, r.decision);
        if (reward(agent, config, graph, feelings) < 0) ++losses;
      } else {
        config[r.site] = r.decision;
      }
    }
    result.deviation_losses[static_cast<int>(d)] = losses;
    if (losses < result.baseline_losses) result.improving = true;
  }
  return result;
}

void write_energy_csv(std::ostream& out, const EnergyReport& report) {
  out << "time,H,e,e1,e2,e3\n" << std::setprecision(12);
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    out << report.times[i] << ',' << report.H[i] << ',' << report.e[i] << ',' << report.e1[i] << ','
        << report.e2[i] << ',' << report.e3[i] << '\n';
  }
}

void write_sites_csv(std::ostream& out, const Graph& graph, const FixationReport& report) {
  out << "site,N1,N2,N3,M,last_flip,empirical_T,rho,degree\n" << std::setprecision(12);
  const Window& w = graph.window();
  for (SiteIndex x : w.interior_sites()) {
    const SiteFixation& s = report.sites[static_cast<std::size_t>(x)];
    const Site p = w.site(x);
    out << p.x1 << ':' << p.x2 << ',' << s.n1 << ',' << s.n2 << ',' << s.n3 << ',' << s.flips << ','
        << s.last_flip << ',' << s.empirical_T << ',' << rho(graph, x) << ',' << graph.degree(x) << '\n';
  }
}

void write_bounds_csv(std::ostream& out, std::span<const BoundRow> rows) {
  out << "C,empirical_fraction,markov_bound\n" << std::setprecision(12);
  for (const auto& r : rows) out << r.threshold << ',' << r.empirical_fraction << ',' << r.markov_bound << '\n';
}

}  // namespace lrgame
