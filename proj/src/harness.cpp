#include "lrgame/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lrgame/dynamics.hpp"
#include "lrgame/errors.hpp"
#include "lrgame/graph.hpp"
#include "lrgame/mixing.hpp"
#include "lrgame/observables.hpp"
#include "lrgame/oracle/oracle.hpp"

namespace lrgame {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr std::pair<ExperimentKind, std::string_view> kKinds[] = {
    {ExperimentKind::graph_stats, "graph-stats"}, {ExperimentKind::simulate, "simulate"},
    {ExperimentKind::fixation, "fixation"},       {ExperimentKind::mixing, "mixing"},
    {ExperimentKind::nash_check, "nash-check"},   {ExperimentKind::oracle_check, "oracle-check"},
};

const std::set<std::string, std::less<>> kKeys = {
    "kind",      "L",      "boundary", "C",       "gamma",  "symmetric", "coin_on_miss",
    "horizon",   "replicas", "seed",   "thresholds", "ladder", "rho",    "tv_time",
    "threads",   "agents", "nash_box", "energy_points",
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  int line = 0;
};

[[noreturn]] void fail(const Entry& e, const std::string& key, const std::string& what) {
  throw ConfigError("line " + std::to_string(e.line) + ": key '" + key + "': " + what);
}

template <typename T>
T parse_number(const Entry& e, const std::string& key) {
  T value{};
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) fail(e, key, "cannot parse '" + e.value + "' as a number");
  return value;
}

bool parse_bool(const Entry& e, const std::string& key) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  fail(e, key, "expected true or false, got '" + e.value + "'");
}

template <typename T>
std::vector<T> parse_list(const Entry& e, const std::string& key) {
  std::vector<T> out;
  std::string_view rest = e.value;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    Entry item{trim(rest.substr(0, comma)), e.line};
    if (item.value.empty()) fail(e, key, "empty list element");
    out.push_back(parse_number<T>(item, key));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) fail(e, key, "empty list");
  return out;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (auto [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<ExperimentKind> parse_kind(std::string_view text) {
  for (auto [k, name] : kKinds) {
    if (name == text) return k;
  }
  return std::nullopt;
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!kKeys.contains(key)) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' has no value");
    if (auto it = entries.find(key); it != entries.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "' (first set on line " +
                        std::to_string(it->second.line) + ")");
    }
    entries.emplace(std::move(key), Entry{std::move(value), line_no});
  }

  for (const char* required : {"kind", "L", "horizon", "seed"}) {
    if (!entries.contains(required)) throw ConfigError(std::string("missing required key '") + required + "'");
  }

  ExperimentConfig cfg;
  auto has = [&](const char* k) { return entries.contains(k); };
  auto get = [&](const char* k) -> const Entry& { return entries.at(k); };

  if (auto kind = parse_kind(get("kind").value)) {
    cfg.kind = *kind;
  } else {
    fail(get("kind"), "kind", "unknown experiment kind '" + get("kind").value + "'");
  }
  cfg.L = parse_number<int>(get("L"), "L");
  if (cfg.L < 2) fail(get("L"), "L", "must be >= 2");
  cfg.horizon = parse_number<double>(get("horizon"), "horizon");
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) fail(get("horizon"), "horizon", "must be positive");
  cfg.seed = parse_number<std::uint64_t>(get("seed"), "seed");

  if (has("boundary")) {
    try {
      cfg.boundary = parse_boundary(get("boundary").value);
    } catch (const std::invalid_argument&) {
      fail(get("boundary"), "boundary", "expected torus, free or pinned");
    }
  }
  if (has("C")) {
    cfg.C = parse_number<double>(get("C"), "C");
    if (!(cfg.C >= 0.0) || !std::isfinite(cfg.C)) fail(get("C"), "C", "must be non-negative");
  }
  if (has("gamma")) {
    cfg.gamma = parse_number<double>(get("gamma"), "gamma");
    if (!(cfg.gamma >= 3.0) || !std::isfinite(cfg.gamma)) fail(get("gamma"), "gamma", "must be >= 3");
  }
  if (has("symmetric")) cfg.symmetric = parse_bool(get("symmetric"), "symmetric");
  if (has("coin_on_miss")) cfg.coin_on_miss = parse_bool(get("coin_on_miss"), "coin_on_miss");
  if (has("replicas")) {
    cfg.replicas = parse_number<int>(get("replicas"), "replicas");
    if (cfg.replicas < 1) fail(get("replicas"), "replicas", "must be >= 1");
  }
  if (has("thresholds")) {
    cfg.thresholds = parse_list<double>(get("thresholds"), "thresholds");
    for (double c : cfg.thresholds) {
      if (!(c > 0.0)) fail(get("thresholds"), "thresholds", "thresholds must be positive");
    }
  }
  if (has("ladder")) {
    cfg.ladder = parse_list<int>(get("ladder"), "ladder");
    for (int l : cfg.ladder) {
      if (l < 4) fail(get("ladder"), "ladder", "box sides must be >= 4");
    }
  }
  if (has("rho")) {
    cfg.rho = parse_number<double>(get("rho"), "rho");
    if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) fail(get("rho"), "rho", "must lie in (0, 1)");
  }
  if (has("tv_time")) {
    cfg.tv_time = parse_number<double>(get("tv_time"), "tv_time");
    if (!(cfg.tv_time >= 0.0)) fail(get("tv_time"), "tv_time", "must be non-negative");
  }
  if (has("threads")) {
    cfg.threads = parse_number<int>(get("threads"), "threads");
    if (cfg.threads < 1) fail(get("threads"), "threads", "must be >= 1");
  }
  if (has("agents")) {
    cfg.agents = parse_number<int>(get("agents"), "agents");
    if (cfg.agents < 1 || cfg.agents > cfg.L * cfg.L) fail(get("agents"), "agents", "must be in [1, L*L]");
  }
  if (has("nash_box")) {
    cfg.nash_box = parse_number<int>(get("nash_box"), "nash_box");
    if (cfg.nash_box < 0) fail(get("nash_box"), "nash_box", "must be >= 0");
  }
  if (has("energy_points")) {
    cfg.energy_points = parse_number<int>(get("energy_points"), "energy_points");
    if (cfg.energy_points < 2) fail(get("energy_points"), "energy_points", "must be >= 2");
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

namespace {

json echo(const ExperimentConfig& c) {
  return {
      {"kind", to_string(c.kind)},
      {"L", c.L},
      {"boundary", to_string(c.boundary)},
      {"C", c.C},
      {"gamma", c.gamma},
      {"symmetric", c.symmetric},
      {"coin_on_miss", c.coin_on_miss},
      {"horizon", c.horizon},
      {"replicas", c.replicas},
      {"seed", c.seed},
      {"thresholds", c.thresholds},
      {"ladder", c.ladder},
      {"rho", c.rho},
      {"tv_time", c.tv_time},
      {"threads", c.threads},
      {"agents", c.agents},
      {"nash_box", c.nash_box},
      {"energy_points", c.energy_points},
  };
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& body) {
  auto out = open_out(path);
  body(out);
  finish(out, path);
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results are
// whatever fn stores by index; the first failure in index order is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Window make_window(const ExperimentConfig& c) {
  switch (c.boundary) {
    case Boundary::torus:
      return Window::torus(c.L);
    case Boundary::free:
      return Window::free(c.L);
    case Boundary::pinned:
      return Window::pinned(c.L, Spin{1});
  }
  return Window::torus(c.L);
}

GraphParams graph_params(const ExperimentConfig& c) { return {c.C, c.gamma}; }

RandomnessPlan replica_plan(const ExperimentConfig& c, int r) {
  return RandomnessPlan(c.seed).replica(static_cast<std::uint64_t>(r));
}

fs::path replica_dir(const RunContext& ctx, const ExperimentConfig& c, int r) {
  if (c.replicas == 1) return ctx.out_dir;
  std::ostringstream name;
  name << "replica_" << std::setw(3) << std::setfill('0') << r;
  return ctx.out_dir / name.str();
}

json replica_seeds(const ExperimentConfig& c) {
  json seeds = json::array();
  for (int r = 0; r < c.replicas; ++r) seeds.push_back({{"replica", r}, {"seed", replica_plan(c, r).master_seed()}});
  return seeds;
}

void log_line(const RunContext& ctx, const std::string& msg) {
  if (!ctx.quiet) std::cerr << msg << '\n';
}

// ---------------------------------------------------------------- graph-stats

void run_graph_stats(const ExperimentConfig& c, const RunContext& ctx, json& manifest) {
  const Window window = make_window(c);
  std::vector<DegreeStats> stats(static_cast<std::size_t>(c.replicas));
  parallel_for(c.replicas, c.threads, [&](int r) {
    const Graph g = sample_graph(window, graph_params(c), replica_plan(c, r));
    stats[static_cast<std::size_t>(r)] = degree_stats(g);
  });
  write_file(ctx.out_dir / "graph_stats.csv", [&](std::ostream& out) {
    out << "replica,seed,sites,mean_degree,rho1,rho2,rho3,rho4,rho5\n" << std::setprecision(12);
    for (int r = 0; r < c.replicas; ++r) {
      const auto& s = stats[static_cast<std::size_t>(r)];
      out << r << ',' << replica_plan(c, r).master_seed() << ',' << s.sites << ',' << s.mean_degree;
      for (double m : s.rho_moment) out << ',' << m;
      out << '\n';
    }
  });
  manifest["outputs"] = {"graph_stats.csv"};
}

// ---------------------------------------------------------------- simulate

void run_simulate(const ExperimentConfig& c, const RunContext& ctx, json& manifest) {
  const Window window = make_window(c);
  json summary = json::array();
  for (int r = 0; r < c.replicas; ++r) {
    const RandomnessPlan plan = replica_plan(c, r);
    const Graph graph = sample_graph(window, graph_params(c), plan);
    const FeelingMap feelings = sample_feelings(graph, c.symmetric, plan);
    RunOptions opts;
    opts.check_invariants = true;
    const RunResult res = run(graph, feelings, memory_strategies({c.coin_on_miss}), c.horizon, plan, opts);

    const fs::path dir = replica_dir(ctx, c, r);
    make_dir(dir);
    write_file(dir / "trajectory.csv", [&](std::ostream& out) { write_trajectory_csv(out, window, res.log); });
    write_file(dir / "final_state.txt",
               [&](std::ostream& out) { write_state(out, graph, feelings, res.state->configuration()); });
    write_file(dir / "memory.txt", [&](std::ostream& out) {
      for (SiteIndex x : window.interior_sites()) {
        const Site s = window.site(x);
        out << "# site " << s.x1 << ' ' << s.x2 << '\n';
        write_memory(out, *res.state->strategy(x).memory());
      }
    });
    const auto flips = std::count_if(res.log.begin(), res.log.end(), [](const StepRecord& s) { return s.flipped; });
    summary.push_back({{"replica", r}, {"events", res.log.size()}, {"flips", flips}});
    log_line(ctx, "simulate: replica " + std::to_string(r) + " processed " + std::to_string(res.log.size()) + " events");
  }
  manifest["summary"] = summary;
  manifest["outputs"] = {"trajectory.csv", "final_state.txt", "memory.txt"};
}

// ---------------------------------------------------------------- fixation

struct FixationReplica {
  FixationReport report;
  EnergyReport energy;
  DegreeStats stats;
  std::vector<int> n3;               // interior order
  std::vector<int> quartile_flips;   // flips per quarter of the horizon
  int radius_exceptions = 0;
  int late_T = 0;                    // empirical T in the second half
  int zero_final_quartile = 0;
  double max_abs_e = 0.0;
  double max_e2 = 0.0;
};

FixationReplica fixation_replica(const ExperimentConfig& c, int r) {
  const Window window = make_window(c);
  const RandomnessPlan plan = replica_plan(c, r);
  const Graph graph = sample_graph(window, graph_params(c), plan);
  const FeelingMap feelings = sample_feelings(graph, c.symmetric, plan);
  RunOptions opts;
  opts.check_invariants = true;
  const RunResult res = run(graph, feelings, memory_strategies({c.coin_on_miss}), c.horizon, plan, opts);

  const int n = window.site_count();
  std::vector<double> t_memory(static_cast<std::size_t>(n), 0.0);
  for (SiteIndex x : window.interior_sites()) t_memory[static_cast<std::size_t>(x)] = empirical_T(res.state->strategy(x));
  if (t_memory != empirical_T_from_log(res.log, n)) {
    throw InvariantViolation("empirical-T", "memory timestamps disagree with the trajectory log");
  }

  FixationReplica out;
  out.report = classify_events(res.log, t_memory, n, c.horizon);
  std::vector<double> grid;
  for (int k = 0; k < c.energy_points; ++k) grid.push_back(c.horizon * k / (c.energy_points - 1));
  out.energy = energy_decomposition(res.log, res.initial, graph, feelings, out.report, grid);
  out.stats = degree_stats(graph);

  out.quartile_flips.assign(4, 0);
  std::vector<int> final_quartile(static_cast<std::size_t>(n), 0);
  for (const auto& rec : res.log) {
    if (!rec.flipped) continue;
    const int q = std::min(3, static_cast<int>(4.0 * rec.time / c.horizon));
    ++out.quartile_flips[static_cast<std::size_t>(q)];
    if (q == 3) ++final_quartile[static_cast<std::size_t>(rec.site)];
  }
  for (SiteIndex x : window.interior_sites()) {
    const auto& s = out.report.sites[static_cast<std::size_t>(x)];
    out.n3.push_back(s.n3);
    if (s.empirical_T > 0.5 * c.horizon) ++out.late_T;
    if (final_quartile[static_cast<std::size_t>(x)] == 0) ++out.zero_final_quartile;
    if (res.state->strategy(x).memory()->radius() > rho(graph, x) + 1) ++out.radius_exceptions;
  }
  for (std::size_t i = 0; i < out.energy.e.size(); ++i) {
    out.max_abs_e = std::max(out.max_abs_e, std::abs(out.energy.e[i]));
    out.max_e2 = std::max(out.max_e2, out.energy.e2[i]);
  }

  return out;
}

void run_fixation(const ExperimentConfig& c, const RunContext& ctx, json& manifest) {
  const Window window = make_window(c);
  std::vector<FixationReplica> reps(static_cast<std::size_t>(c.replicas));
  parallel_for(c.replicas, c.threads, [&](int r) { reps[static_cast<std::size_t>(r)] = fixation_replica(c, r); });

  std::vector<int> pooled_n3;
  double rho2 = 0.0, rho3 = 0.0;
  json per_replica = json::array();
  for (int r = 0; r < c.replicas; ++r) {
    const auto& rep = reps[static_cast<std::size_t>(r)];
    const fs::path dir = replica_dir(ctx, c, r);
    make_dir(dir);
    // Sites CSV needs the graph; resampling is deterministic.
    const RandomnessPlan plan = replica_plan(c, r);
    const Graph graph = sample_graph(window, graph_params(c), plan);
    write_file(dir / "energy.csv", [&](std::ostream& out) { write_energy_csv(out, rep.energy); });
    write_file(dir / "sites.csv", [&](std::ostream& out) { write_sites_csv(out, graph, rep.report); });
    pooled_n3.insert(pooled_n3.end(), rep.n3.begin(), rep.n3.end());
    rho2 += rep.stats.rho_moment[1] / c.replicas;
    rho3 += rep.stats.rho_moment[2] / c.replicas;
    per_replica.push_back({{"replica", r},
                           {"seed", plan.master_seed()},
                           {"late_empirical_T", rep.late_T},
                           {"zero_flip_final_quartile", rep.zero_final_quartile},
                           {"quartile_flips", rep.quartile_flips},
                           {"radius_exceptions", rep.radius_exceptions},
                           {"max_abs_e", rep.max_abs_e},
                           {"max_e2", rep.max_e2},
                           {"n3_unit_decrease_findings", rep.energy.n3_findings.size()},
                           {"rho2", rep.stats.rho_moment[1]},
                           {"rho3", rep.stats.rho_moment[2]}});
  }
  const auto rows = markov_bound_check(pooled_n3, rho2, rho3, c.thresholds);
  write_file(ctx.out_dir / "bounds.csv", [&](std::ostream& out) { write_bounds_csv(out, rows); });
  manifest["summary"] = {{"replicas", per_replica}, {"rho2", rho2}, {"rho3", rho3}};
  manifest["outputs"] = {"energy.csv", "sites.csv", "bounds.csv"};
}

// ---------------------------------------------------------------- mixing

void run_mixing(const ExperimentConfig& c, const RunContext& ctx, json& manifest) {
  MixingParams params;
  params.graph = graph_params(c);
  params.symmetric = c.symmetric;
  params.memory.coin_on_miss = c.coin_on_miss;
  params.rho = c.rho;

  std::ofstream tv = open_out(ctx.out_dir / "tv.csv");
  std::ofstream front = open_out(ctx.out_dir / "front.csv");
  std::ofstream violations = open_out(ctx.out_dir / "violations.csv");
  tv << "L,t,pair_id,estimate,half_width,replicas\n" << std::setprecision(12);
  front << "L,replica,front_time_or_NA\n" << std::setprecision(12);
  violations << "L,seed,subbox_a,subbox_b,x1,x2,y1,y2\n";

  json ladder = json::array();
  for (int L : c.ladder) {
    const SubboxPartition partition = partition_subboxes(L, c.rho, false);
    const auto region = centered_block(L);
    const BoundaryPair opposite = opposite_frames(L);
    const BoundaryPair identical = identical_frames(L, Spin{1});
    const RandomnessPlan ladder_plan = RandomnessPlan(c.seed).replica(static_cast<std::uint64_t>(L));
    const Window window = Window::pinned(L, Spin{1});
    MixingParams quenched_params = params;
    quenched_params.quenched_seed = ladder_plan.bits(Stream::sample, static_cast<std::uint64_t>(L));

    struct Rep {
      std::uint32_t opp_a = 0, opp_b = 0, id_a = 0, id_b = 0, q_a = 0, q_b = 0;
      std::optional<double> front;
      std::vector<LinkedPair> linked;
    };
    std::vector<Rep> reps(static_cast<std::size_t>(c.replicas));
    parallel_for(c.replicas, c.threads, [&](int r) {
      const RandomnessPlan rp = ladder_plan.replica(static_cast<std::uint64_t>(r));
      Rep& rep = reps[static_cast<std::size_t>(r)];
      const auto opp = coupled_replica(L, opposite, c.tv_time, rp, params);
      const auto same = coupled_replica(L, identical, c.tv_time, rp, params);
      const auto quenched = coupled_replica(L, opposite, c.tv_time, rp, quenched_params);
      rep.opp_a = region_code(window, opp.first, region);
      rep.opp_b = region_code(window, opp.second, region);
      rep.id_a = region_code(window, same.first, region);
      rep.id_b = region_code(window, same.second, region);
      rep.q_a = region_code(window, quenched.first, region);
      rep.q_b = region_code(window, quenched.second, region);
      const auto traj = coupled_replica(L, opposite, c.horizon, rp, params, 20);
      for (SiteIndex x : window.interior_sites()) {
        if (traj.black[static_cast<std::size_t>(traj.subbox[static_cast<std::size_t>(x)])] >
            traj.tau[static_cast<std::size_t>(x)]) {
          throw InvariantViolation("coupling-domination", "nu-tilde below nu at L=" + std::to_string(L));
        }
      }
      for (std::size_t k = 1; k < traj.nu.size(); ++k) {
        for (std::size_t i = 0; i < traj.nu[k].size(); ++i) {
          if (traj.nu[k][i] < traj.nu[k - 1][i] || traj.nu_tilde[k][i] < traj.nu_tilde[k - 1][i] ||
              traj.nu_tilde[k][i] < traj.nu[k][i]) {
            throw InvariantViolation("coupling-monotonicity", "indicator decreased at L=" + std::to_string(L));
          }
        }
      }
      rep.front = black_front_time(traj, partition, region);
      const Graph g = sample_graph(window, params.graph, rp);
      rep.linked = find_linked_nonneighbor(g, partition);
    });

    std::vector<std::uint32_t> oa, ob, ia, ib, qa, qb;
    std::vector<double> fronts;
    for (int r = 0; r < c.replicas; ++r) {
      const Rep& rep = reps[static_cast<std::size_t>(r)];
      oa.push_back(rep.opp_a);
      ob.push_back(rep.opp_b);
      ia.push_back(rep.id_a);
      ib.push_back(rep.id_b);
      qa.push_back(rep.q_a);
      qb.push_back(rep.q_b);
      fronts.push_back(rep.front.value_or(kNever));
      front << L << ',' << r << ',';
      if (rep.front) {
        front << *rep.front;
      } else {
        front << "NA";
      }
      front << '\n';
      const std::uint64_t seed = ladder_plan.replica(static_cast<std::uint64_t>(r)).master_seed();
      for (const auto& lp : rep.linked) {
        const Site x = window.site(lp.x), y = window.site(lp.y);
        violations << L << ',' << seed << ',' << lp.subbox_a << ',' << lp.subbox_b << ',' << x.x1 << ',' << x.x2
                   << ',' << y.x1 << ',' << y.x2 << '\n';
      }
    }
    const TvEstimate opp = tv_from_samples(oa, ob, ladder_plan, 1000);
    const TvEstimate same = tv_from_samples(ia, ib, ladder_plan, 1000);
    const TvEstimate quenched = tv_from_samples(qa, qb, ladder_plan, 1000);
    tv << L << ',' << c.tv_time << ",opposite," << opp.estimate << ',' << opp.half_width << ',' << opp.replicas << '\n';
    tv << L << ',' << c.tv_time << ",identical," << same.estimate << ',' << same.half_width << ',' << same.replicas
       << '\n';
    tv << L << ',' << c.tv_time << ",opposite-quenched," << quenched.estimate << ',' << quenched.half_width << ','
       << quenched.replicas << '\n';

    std::sort(fronts.begin(), fronts.end());
    const double median = fronts[fronts.size() / 2];
    const auto with_links = std::count_if(reps.begin(), reps.end(), [](const Rep& r) { return !r.linked.empty(); });
    ladder.push_back({{"L", L},
                      {"subbox_side", partition.subbox_side},
                      {"rho_effective", partition.rho_effective},
                      {"tv_opposite", opp.estimate},
                      {"tv_opposite_half_width", opp.half_width},
                      {"tv_identical", same.estimate},
                      {"tv_opposite_quenched", quenched.estimate},
                      {"quenched_graph_seed", *quenched_params.quenched_seed},
                      {"median_front_time", std::isfinite(median) ? json(median) : json("NA")},
                      {"replicas_with_linked_nonneighbors", with_links}});
    log_line(ctx, "mixing: L=" + std::to_string(L) + " done");
  }
  finish(tv, ctx.out_dir / "tv.csv");
  finish(front, ctx.out_dir / "front.csv");
  finish(violations, ctx.out_dir / "violations.csv");
  manifest["summary"] = {{"ladder", ladder}};
  manifest["ladder_seed_rule"] = "replica seed = plan(seed).replica(L).replica(r)";
  manifest["outputs"] = {"tv.csv", "front.csv", "violations.csv"};
}

// ---------------------------------------------------------------- nash-check

void run_nash(const ExperimentConfig& c, const RunContext& ctx, json& manifest) {
  if (c.boundary != Boundary::torus) throw ConfigError("nash-check requires boundary = torus");
  const Window window = Window::torus(c.L);
  std::vector<std::vector<NashResult>> results(static_cast<std::size_t>(c.replicas));
  parallel_for(c.replicas, c.threads, [&](int r) {
    const RandomnessPlan plan = replica_plan(c, r);
    const Graph graph = sample_graph(window, graph_params(c), plan);
    const FeelingMap feelings = sample_feelings(graph, c.symmetric, plan);
    const RunResult res = run(graph, feelings, memory_strategies({c.coin_on_miss}), c.horizon, plan);
    const auto t = empirical_T_from_log(res.log, window.site_count());
    std::vector<SiteIndex> agents;
    const auto interior = window.interior_sites();
    for (std::uint64_t k = 0; static_cast<int>(agents.size()) < c.agents; ++k) {
      const SiteIndex a = interior[plan.bits(Stream::sample, 0, k) % interior.size()];
      if (std::find(agents.begin(), agents.end(), a) == agents.end()) agents.push_back(a);
    }
    for (SiteIndex a : agents) {
      results[static_cast<std::size_t>(r)].push_back(nash_check(res.log, res.initial, graph, feelings, t, a, c.nash_box));
    }
  });

  int improving = 0;
  write_file(ctx.out_dir / "nash.csv", [&](std::ostream& out) {
    out << "replica,seed,site_x1,site_x2,cut_time,suffix_events,baseline_losses,plus_losses,minus_losses,flip_losses,"
           "improving\n"
        << std::setprecision(12);
    for (int r = 0; r < c.replicas; ++r) {
      for (const auto& n : results[static_cast<std::size_t>(r)]) {
        const Site s = window.site(n.agent);
        out << r << ',' << replica_plan(c, r).master_seed() << ',' << s.x1 << ',' << s.x2 << ',' << n.cut_time << ','
            << n.suffix_events << ',' << n.baseline_losses << ',' << n.deviation_losses[0] << ','
            << n.deviation_losses[1] << ',' << n.deviation_losses[2] << ',' << (n.improving ? 1 : 0) << '\n';
        if (n.improving) ++improving;
      }
    }
  });
  manifest["outputs"] = {"nash.csv"};
  manifest["summary"] = {{"improving_deviations", improving}};
  if (improving > 0) {
    throw InvariantViolation("nash-equilibrium", std::to_string(improving) + " agent(s) gained by deviating");
  }
}

// ---------------------------------------------------------------- oracle-check

bool run_oracle_check(const ExperimentConfig& c, const RunContext& ctx, json& manifest) {
  struct Row {
    std::string name;
    int side;
    oracle::CheckResult result;
  };
  std::vector<Row> rows;
  const GraphParams params = graph_params(c);
  for (int side : {3, 4}) {
    rows.push_back({"reward-energy", side, oracle::check_reward_energy(side, 1000, c.seed, params, c.symmetric)});
    rows.push_back({"replay", side, oracle::check_replay(side, 20, 50, c.seed, params, c.symmetric)});
  }
  bool all = true;
  json summary = json::array();
  write_file(ctx.out_dir / "oracle.csv", [&](std::ostream& out) {
    out << "oracle,window,trials,mismatches,pass\n";
    for (const auto& r : rows) {
      out << r.name << ',' << r.side << 'x' << r.side << ',' << r.result.trials << ',' << r.result.mismatches << ','
          << (r.result.pass() ? "pass" : "fail") << '\n';
      all = all && r.result.pass();
      summary.push_back({{"oracle", r.name}, {"window", r.side}, {"pass", r.result.pass()}});
      log_line(ctx, "oracle " + r.name + " " + std::to_string(r.side) + "x" + std::to_string(r.side) + ": " +
                        (r.result.pass() ? "pass" : "FAIL"));
    }
  });
  manifest["summary"] = summary;
  manifest["outputs"] = {"oracle.csv"};
  return all;
}

void write_manifest(const fs::path& dir, const json& manifest) {
  write_file(dir / "manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

}  // namespace

int run_experiment(const ExperimentConfig& config, const RunContext& ctx) {
  json manifest;
  manifest["tool"] = "lrgame";
  manifest["version"] = kVersion;
  manifest["timestamp"] = utc_timestamp();
  manifest["config"] = echo(config);
  manifest["replica_seeds"] = replica_seeds(config);

  int code = kExitOk;
  try {
    make_dir(ctx.out_dir);
    switch (config.kind) {
      case ExperimentKind::graph_stats:
        run_graph_stats(config, ctx, manifest);
        break;
      case ExperimentKind::simulate:
        run_simulate(config, ctx, manifest);
        break;
      case ExperimentKind::fixation:
        run_fixation(config, ctx, manifest);
        break;
      case ExperimentKind::mixing:
        run_mixing(config, ctx, manifest);
        break;
      case ExperimentKind::nash_check:
        run_nash(config, ctx, manifest);
        break;
      case ExperimentKind::oracle_check:
        if (!run_oracle_check(config, ctx, manifest)) {
          manifest["violated_invariant"] = "oracle-equivalence";
          code = kExitInvariant;
        }
        break;
    }
    manifest["status"] = code == kExitOk ? "ok" : "invariant_violation";
  } catch (const InvariantViolation& e) {
    manifest["status"] = "invariant_violation";
    manifest["violated_invariant"] = e.invariant();
    manifest["detail"] = e.what();
    code = kExitInvariant;
  } catch (const ConfigError& e) {
    manifest["status"] = "config_error";
    manifest["detail"] = e.what();
    code = kExitConfig;
  } catch (const IoError& e) {
    if (!ctx.quiet) std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  try {
    write_manifest(ctx.out_dir, manifest);
  } catch (const IoError& e) {
    if (!ctx.quiet) std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  if (code != kExitOk && !ctx.quiet) std::cerr << "error: " << manifest.value("detail", std::string("oracle mismatch")) << '\n';
  return code;
}

}  // namespace lrgame
