#include "lrgame/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "lrgame/errors.hpp"

namespace lrgame {

double rate_function(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("rate_function: alpha must be positive");
  return alpha - 1.0 - std::log(alpha);
}

bool SubboxPartition::neighbors(int a, int b) const noexcept {
  if (a == b) return false;
  int d1 = std::abs(a / grid - b / grid);
  int d2 = std::abs(a % grid - b % grid);
  if (wrap) {
    d1 = std::min(d1, grid - d1);
    d2 = std::min(d2, grid - d2);
  }
  return std::max(d1, d2) <= 1;
}

std::vector<int> SubboxPartition::neighbor_list(int a) const {
  std::vector<int> out;
  for (int b = 0; b < count(); ++b) {
    if (neighbors(a, b)) out.push_back(b);
  }
  return out;
}

SubboxPartition partition_subboxes(int box_side, double rho, bool wrap) {
  if (box_side < 2) throw std::invalid_argument("partition_subboxes: box side must be >= 2");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("partition_subboxes: rho must lie in (0, 1)");
  int s = std::max(2, static_cast<int>(std::lround(std::pow(static_cast<double>(box_side), rho))));
  while (s >= 2 && box_side % s != 0) --s;
  if (s < 2) {
    throw std::invalid_argument("partition_subboxes: no subbox side >= 2 divides " + std::to_string(box_side));
  }
  SubboxPartition p;
  p.box_side = box_side;
  p.rho = rho;
  p.subbox_side = s;
  p.grid = box_side / s;
  p.wrap = wrap;
  p.rho_effective = std::log(static_cast<double>(s)) / std::log(static_cast<double>(box_side));
  return p;
}

std::vector<LinkedPair> find_linked_nonneighbor(const Graph& graph, const SubboxPartition& partition) {
  const Window& w = graph.window();
  if (w.side() != partition.box_side) throw std::invalid_argument("partition does not match the graph window");
  std::vector<LinkedPair> out;
  std::unordered_map<long long, std::size_t> seen;
  for (auto [x, y] : graph.edges()) {
    if (!w.is_interior(x) || !w.is_interior(y)) continue;
    int a = partition.subbox_of(w.site(x));
    int b = partition.subbox_of(w.site(y));
    if (a == b || partition.neighbors(a, b)) continue;
    SiteIndex wx = x, wy = y;
    if (a > b) {
      std::swap(a, b);
      std::swap(wx, wy);
    }
    const long long key = static_cast<long long>(a) * partition.count() + b;
    if (seen.emplace(key, out.size()).second) out.push_back({a, b, wx, wy});
  }
  std::sort(out.begin(), out.end(), [](const LinkedPair& p, const LinkedPair& q) {
    return p.subbox_a != q.subbox_a ? p.subbox_a < q.subbox_a : p.subbox_b < q.subbox_b;
  });
  return out;
}

bool CouplingTrajectory::nu_tilde_at(SiteIndex x, double t) const {
  const int s = subbox[static_cast<std::size_t>(x)];
  return s >= 0 && t >= black[static_cast<std::size_t>(s)];
}

CouplingTrajectory coupled_run(const Graph& graph, const FeelingMap& feelings, std::span<const Spin> frame_a,
                               std::span<const Spin> frame_b, const SubboxPartition& partition,
                               const StrategyFactory& factory, double horizon, const RandomnessPlan& plan,
                               int snapshots) {
  const Window& window = graph.window();
  if (window.boundary() != Boundary::pinned) throw std::invalid_argument("coupled_run needs a pinned window");
  if (partition.box_side != window.side()) throw std::invalid_argument("partition does not match the window");
  const auto frame = window.frame_sites();
  if (frame_a.size() != frame.size() || frame_b.size() != frame.size()) {
    throw std::invalid_argument("coupled_run: both frames must assign every frame site");
  }

  Configuration shared = init_configuration(window, plan);
  Configuration start_a = shared;
  Configuration start_b = shared;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    start_a[frame[i]] = frame_a[i];
    start_b[frame[i]] = frame_b[i];
  }
  Simulation a(graph, feelings, std::move(start_a), factory, plan);
  Simulation b(graph, feelings, std::move(start_b), factory, plan);

  CouplingTrajectory traj;
  traj.horizon = horizon;
  traj.tau.assign(static_cast<std::size_t>(window.site_count()), kNever);
  traj.black.assign(static_cast<std::size_t>(partition.count()), kNever);
  traj.subbox.assign(static_cast<std::size_t>(window.site_count()), -1);
  for (SiteIndex x : window.interior_sites()) traj.subbox[static_cast<std::size_t>(x)] = partition.subbox_of(window.site(x));

  std::vector<std::vector<int>> neighbor_boxes(static_cast<std::size_t>(partition.count()));
  for (int s = 0; s < partition.count(); ++s) neighbor_boxes[static_cast<std::size_t>(s)] = partition.neighbor_list(s);

  // Frame sites where the two boundary conditions differ have tau = 0. They
  // sit in virtual subboxes just outside the grid, black from the start.
  std::vector<std::uint8_t> touches_black_frame(static_cast<std::size_t>(partition.count()), 0);
  const auto cell = [&](int c) { return c < 0 ? -1 : c / partition.subbox_side; };
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (frame_a[i] == frame_b[i]) continue;
    const Site f = window.site(frame[i]);
    const int r = cell(f.x1), c = cell(f.x2);
    for (int a = std::max(0, r - 1); a <= std::min(partition.grid - 1, r + 1); ++a) {
      for (int b = std::max(0, c - 1); b <= std::min(partition.grid - 1, c + 1); ++b) {
        touches_black_frame[static_cast<std::size_t>(a * partition.grid + b)] = 1;
      }
    }
  }

  std::size_t next_snapshot = 0;
  if (snapshots > 0) {
    for (int k = 0; k <= snapshots; ++k) traj.grid.push_back(horizon * k / snapshots);
  }
  // Indicator values as seen by the running process, not re-derived afterwards.
  std::vector<std::uint8_t> nu_live(static_cast<std::size_t>(window.site_count()), 0);
  std::vector<std::uint8_t> black_live(static_cast<std::size_t>(partition.count()), 0);
  auto take_snapshots = [&](double t) {
    while (next_snapshot < traj.grid.size() && traj.grid[next_snapshot] < t) {
      auto& n = traj.nu.emplace_back();
      auto& nt = traj.nu_tilde.emplace_back();
      for (SiteIndex x : window.interior_sites()) {
        n.push_back(nu_live[static_cast<std::size_t>(x)]);
        nt.push_back(black_live[static_cast<std::size_t>(traj.subbox[static_cast<std::size_t>(x)])]);
      }
      ++next_snapshot;
    }
  };
  auto blacken = [&](int s, double t) {
    if (!black_live[static_cast<std::size_t>(s)]) {
      black_live[static_cast<std::size_t>(s)] = 1;
      traj.black[static_cast<std::size_t>(s)] = t;
    }
  };

  const EventStream stream = build_event_stream(window, horizon, plan);
  for (const Event& e : stream.events) {
    take_snapshots(e.time);
    const StepRecord ra = a.step(e);
    const StepRecord rb = b.step(e);
    if (ra.time != rb.time || ra.site != rb.site || ra.arrival != rb.arrival) {
      throw InvariantViolation("shared-randomness", "coupled copies processed different events");
    }
    const auto xs = static_cast<std::size_t>(e.site);
    const int box = traj.subbox[xs];
    if (!nu_live[xs] && a.configuration()[e.site] != b.configuration()[e.site]) {
      nu_live[xs] = 1;
      traj.tau[xs] = e.time;
      blacken(box, e.time);  // same-subbox rule
    }
    if (!black_live[static_cast<std::size_t>(box)] && touches_black_frame[static_cast<std::size_t>(box)]) {
      blacken(box, e.time);
    }
    if (!black_live[static_cast<std::size_t>(box)]) {
      for (int nb : neighbor_boxes[static_cast<std::size_t>(box)]) {
        if (black_live[static_cast<std::size_t>(nb)]) {  // neighbour-subbox rule, at x's own arrival
          blacken(box, e.time);
          break;
        }
      }
    }
    ++traj.events;
  }
  take_snapshots(kNever);
  traj.first = a.configuration();
  traj.second = b.configuration();
  return traj;
}

BoundaryPair opposite_frames(int side) {
  const Window w = Window::pinned(side, Spin{1});
  const auto n = w.frame_sites().size();
  return {std::vector<Spin>(n, Spin{1}), std::vector<Spin>(n, Spin{-1})};
}

BoundaryPair identical_frames(int side, Spin value) {
  const Window w = Window::pinned(side, value);
  const auto n = w.frame_sites().size();
  return {std::vector<Spin>(n, value), std::vector<Spin>(n, value)};
}

CouplingTrajectory coupled_replica(int side, const BoundaryPair& frames, double horizon, const RandomnessPlan& plan,
                                   const MixingParams& params, int snapshots) {
  const Window window = Window::pinned(side, frames.first);
  const RandomnessPlan graph_plan = params.quenched_seed ? RandomnessPlan(*params.quenched_seed) : plan;
  const Graph graph = sample_graph(window, params.graph, graph_plan);
  const FeelingMap feelings = sample_feelings(graph, params.symmetric, graph_plan);
  const SubboxPartition partition = partition_subboxes(side, params.rho, false);
  return coupled_run(graph, feelings, frames.first, frames.second, partition, memory_strategies(params.memory),
                     horizon, plan, snapshots);
}

std::optional<double> black_front_time(const CouplingTrajectory& trajectory, const SubboxPartition& partition,
                                       std::span<const Site> region) {
  double first = kNever;
  for (Site s : region) {
    first = std::min(first, trajectory.black[static_cast<std::size_t>(partition.subbox_of(s))]);
  }
  if (first > trajectory.horizon) return std::nullopt;
  return first;
}

std::uint32_t region_code(const Window& window, const Configuration& config, std::span<const Site> region) {
  if (region.size() > 12) throw std::invalid_argument("region too large to enumerate patterns");
  std::uint32_t code = 0;
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (config[window.index(region[i])] > 0) code |= 1u << i;
  }
  return code;
}

namespace {

double tv_of(std::span<const std::uint32_t> first, std::span<const std::uint32_t> second,
             std::span<const std::size_t> pick) {
  std::unordered_map<std::uint32_t, long long> diff;
  for (std::size_t i : pick) {
    ++diff[first[i]];
    --diff[second[i]];
  }
  long long total = 0;
  for (const auto& [code, d] : diff) total += std::llabs(d);
  return 0.5 * static_cast<double>(total) / static_cast<double>(pick.size());
}

}  // namespace

TvEstimate tv_from_samples(std::span<const std::uint32_t> first, std::span<const std::uint32_t> second,
                           const RandomnessPlan& plan, int bootstrap) {
  if (first.size() != second.size() || first.empty()) throw std::invalid_argument("tv_from_samples: paired samples required");
  const std::size_t n = first.size();
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;

  TvEstimate est;
  est.replicas = static_cast<int>(n);
  est.estimate = tv_of(first, second, pick);
  if (bootstrap <= 0) return est;

  // Coupled pairs are resampled together.
  std::mt19937_64 rng(plan.bits(Stream::bootstrap, n));
  std::uniform_int_distribution<std::size_t> draw(0, n - 1);
  std::vector<double> stats(static_cast<std::size_t>(bootstrap));
  for (auto& s : stats) {
    for (auto& p : pick) p = draw(rng);
    s = tv_of(first, second, pick);
  }
  std::sort(stats.begin(), stats.end());
  const auto at = [&](double q) { return stats[static_cast<std::size_t>(q * (stats.size() - 1))]; };
  est.half_width = 0.5 * (at(0.975) - at(0.025));
  return est;
}

TvEstimate tv_estimate(int side, std::span<const Site> region, double t, const BoundaryPair& frames, int replicas,
                       const RandomnessPlan& plan, const MixingParams& params, int bootstrap) {
  if (replicas < 1) throw std::invalid_argument("tv_estimate: replicas must be positive");
  if (!(t >= 0.0)) throw std::invalid_argument("tv_estimate: time must be non-negative");
  const Window window = Window::pinned(side, frames.first);
  for (Site s : region) {
    if (!window.is_interior(s)) throw std::invalid_argument("tv_estimate: region must lie inside the box");
  }
  std::vector<std::uint32_t> first, second;
  first.reserve(static_cast<std::size_t>(replicas));
  second.reserve(static_cast<std::size_t>(replicas));
  for (int r = 0; r < replicas; ++r) {
    const RandomnessPlan rp = plan.replica(static_cast<std::uint64_t>(r));
    const CouplingTrajectory traj = coupled_replica(side, frames, t, rp, params);
    first.push_back(region_code(window, traj.first, region));
    second.push_back(region_code(window, traj.second, region));
  }
  return tv_from_samples(first, second, plan, bootstrap);
}

std::vector<Site> centered_block(int side, int block) {
  const int start = (side - block) / 2;
  std::vector<Site> out;
  for (int i = 0; i < block; ++i) {
    for (int j = 0; j < block; ++j) out.push_back({start + i, start + j});
  }
  return out;
}

}  // namespace lrgame
