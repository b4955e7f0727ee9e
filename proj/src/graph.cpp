#include "lrgame/graph.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lrgame/errors.hpp"

namespace lrgame {

double edge_probability(int distance, double C, double gamma) {
  if (distance <= 0) throw std::invalid_argument("edge_probability: x and y must differ");
  if (distance == 1) return 1.0;
  return std::min(1.0, C / std::pow(static_cast<double>(distance), gamma));
}

double edge_probability(const Window& window, Site x, Site y, double C, double gamma) {
  return edge_probability(window.distance(x, y), C, gamma);
}

Graph::Graph(Window window, GraphParams params, std::uint64_t seed)
    : window_(std::move(window)),
      params_(params),
      seed_(seed),
      adjacency_(static_cast<std::size_t>(window_.site_count())),
      reverse_(adjacency_.size()) {}

Graph::Graph(Window window, GraphParams params, std::uint64_t seed,
             std::vector<std::vector<SiteIndex>> adjacency)
    : window_(std::move(window)), params_(params), seed_(seed), adjacency_(std::move(adjacency)) {
  if (adjacency_.size() != static_cast<std::size_t>(window_.site_count())) {
    throw std::invalid_argument("adjacency does not match the window");
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  reverse_.resize(adjacency_.size());
  rebuild_reverse();
}

bool Graph::linked(SiteIndex x, SiteIndex y) const noexcept {
  const auto& adj = adjacency_[x];
  return std::binary_search(adj.begin(), adj.end(), y);
}

std::size_t Graph::edge_count() const noexcept {
  std::size_t n = 0;
  for (const auto& adj : adjacency_) n += adj.size();
  return n / 2;
}

void Graph::add_edge(SiteIndex x, SiteIndex y) {
  if (x == y) throw std::invalid_argument("self loops are not allowed");
  if (linked(x, y)) return;
  auto insert = [](std::vector<SiteIndex>& adj, SiteIndex v) {
    adj.insert(std::upper_bound(adj.begin(), adj.end(), v), v);
  };
  insert(adjacency_[x], y);
  insert(adjacency_[y], x);
  rebuild_reverse();
}

void Graph::rebuild_reverse() {
  for (std::size_t x = 0; x < adjacency_.size(); ++x) {
    auto& rev = reverse_[x];
    rev.resize(adjacency_[x].size());
    for (std::size_t k = 0; k < adjacency_[x].size(); ++k) {
      const auto& other = adjacency_[adjacency_[x][k]];
      auto it = std::lower_bound(other.begin(), other.end(), static_cast<SiteIndex>(x));
      rev[k] = static_cast<int>(it - other.begin());
    }
  }
}

std::vector<std::pair<SiteIndex, SiteIndex>> Graph::edges() const {
  std::vector<std::pair<SiteIndex, SiteIndex>> out;
  for (SiteIndex x = 0; x < static_cast<SiteIndex>(adjacency_.size()); ++x) {
    for (SiteIndex y : adjacency_[x]) {
      if (x < y) out.emplace_back(x, y);
    }
  }
  return out;
}

Graph sample_graph(const Window& window, GraphParams params, const RandomnessPlan& plan) {
  if (!(params.C >= 0.0)) throw std::invalid_argument("C must be non-negative");
  if (!(params.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");

  const SiteIndex n = window.site_count();
  const int max_distance = 2 * window.extent();
  std::vector<double> prob(static_cast<std::size_t>(max_distance) + 1, 0.0);
  for (int d = 1; d <= max_distance; ++d) prob[d] = edge_probability(d, params.C, params.gamma);

  // Built directly into sorted lists: y increases inside the inner loop.
  std::vector<std::vector<SiteIndex>> adjacency(static_cast<std::size_t>(n));
  for (SiteIndex x = 0; x < n; ++x) {
    for (SiteIndex y = x + 1; y < n; ++y) {
      const int d = window.distance(x, y);
      if (d == 0) continue;  // torus of side 2 folds onto itself
      const double p = prob[d];
      if (p <= 0.0) continue;
      if (p >= 1.0 || plan.uniform(Stream::edge, static_cast<std::uint64_t>(x),
                                   static_cast<std::uint64_t>(y)) < p) {
        adjacency[x].push_back(y);
        adjacency[y].push_back(x);
      }
    }
  }
  return Graph(window, params, plan.master_seed(), std::move(adjacency));
}

}  // namespace lrgame

namespace lrgame {

FeelingMap::FeelingMap(const Graph& graph, bool symmetric) : symmetric_(symmetric) {
  const SiteIndex n = graph.window().site_count();
  j_.resize(static_cast<std::size_t>(n));
  for (SiteIndex x = 0; x < n; ++x) j_[x].assign(graph.neighbors(x).size(), Spin{1});
}

Spin FeelingMap::operator()(const Graph& graph, SiteIndex x, SiteIndex y) const noexcept {
  const auto adj = graph.neighbors(x);
  auto it = std::lower_bound(adj.begin(), adj.end(), y);
  if (it == adj.end() || *it != y) return 0;
  return j_[x][static_cast<std::size_t>(it - adj.begin())];
}

void FeelingMap::set(const Graph& graph, SiteIndex x, SiteIndex y, Spin value) {
  const auto adj = graph.neighbors(x);
  auto it = std::lower_bound(adj.begin(), adj.end(), y);
  if (it == adj.end() || *it != y) throw std::invalid_argument("feeling set on a non-edge");
  j_[x][static_cast<std::size_t>(it - adj.begin())] = value;
}

FeelingMap sample_feelings(const Graph& graph, bool symmetric, const RandomnessPlan& plan) {
  FeelingMap feelings(graph, symmetric);
  const SiteIndex n = graph.window().site_count();
  for (SiteIndex x = 0; x < n; ++x) {
    const auto adj = graph.neighbors(x);
    for (std::size_t k = 0; k < adj.size(); ++k) {
      const SiteIndex y = adj[k];
      // Symmetric mode keys on the unordered pair, asymmetric on the ordered one.
      const auto a = static_cast<std::uint64_t>(symmetric ? std::min(x, y) : x);
      const auto b = static_cast<std::uint64_t>(symmetric ? std::max(x, y) : y);
      feelings.set(x, static_cast<int>(k), plan.fair_spin(Stream::feeling, a, b, symmetric ? 0 : 1));
    }
  }
  return feelings;
}

int rho(const Graph& graph, SiteIndex x) {
  int longest = 0;
  for (SiteIndex y : graph.neighbors(x)) longest = std::max(longest, graph.window().distance(x, y));
  return longest;
}

DegreeStats degree_stats(const Graph& graph) {
  DegreeStats stats;
  const auto sites = graph.window().interior_sites();
  stats.sites = static_cast<int>(sites.size());
  if (sites.empty()) return stats;

  std::array<double, 5> sum{};
  std::array<double, 5> sum_sq{};
  double degree_sum = 0.0;
  for (SiteIndex x : sites) {
    degree_sum += graph.degree(x);
    double power = 1.0;
    const double r = rho(graph, x);
    for (int k = 0; k < 5; ++k) {
      power *= r;
      sum[k] += power;
      sum_sq[k] += power * power;
    }
  }
  const double n = static_cast<double>(sites.size());
  stats.mean_degree = degree_sum / n;
  for (int k = 0; k < 5; ++k) {
    stats.rho_moment[k] = sum[k] / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq[k] - n * stats.rho_moment[k] * stats.rho_moment[k]) / (n - 1)) : 0.0;
    stats.rho_moment_se[k] = std::sqrt(var / n);
  }
  return stats;
}

void write_graph(std::ostream& out, const Graph& graph, const FeelingMap& feelings) {
  const Window& w = graph.window();
  out << w.side() << ' ' << to_string(w.boundary()) << ' ' << std::setprecision(17)
      << graph.params().C << ' ' << graph.params().gamma << ' ' << graph.seed() << '\n';
  for (auto [x, y] : graph.edges()) {
    const Site a = w.site(x);
    const Site b = w.site(y);
    out << a.x1 << ' ' << a.x2 << ' ' << b.x1 << ' ' << b.x2 << ' '
        << static_cast<int>(feelings(graph, x, y)) << ' ' << static_cast<int>(feelings(graph, y, x))
        << '\n';
  }
}

std::pair<Graph, FeelingMap> read_graph(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("graph file: missing header");
  std::istringstream header(line);
  int side = 0;
  std::string boundary;
  GraphParams params;
  std::uint64_t seed = 0;
  if (!(header >> side >> boundary >> params.C >> params.gamma >> seed)) {
    throw IoError("graph file: malformed header '" + line + "'");
  }
  const Boundary mode = parse_boundary(boundary);
  Window window = mode == Boundary::torus  ? Window::torus(side)
                  : mode == Boundary::free ? Window::free(side)
                                           : Window::pinned(side, Spin{1});

  struct Row {
    SiteIndex x, y;
    int jxy, jyx;
  };
  std::vector<Row> rows;
  std::vector<std::vector<SiteIndex>> adjacency(static_cast<std::size_t>(window.site_count()));
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    Site a, b;
    Row row{};
    if (!(fields >> a.x1 >> a.x2 >> b.x1 >> b.x2 >> row.jxy >> row.jyx) || !window.on_grid(a) ||
        !window.on_grid(b) || std::abs(row.jxy) != 1 || std::abs(row.jyx) != 1) {
      throw IoError("graph file: malformed edge on line " + std::to_string(line_no));
    }
    row.x = window.index(a);
    row.y = window.index(b);
    adjacency[row.x].push_back(row.y);
    adjacency[row.y].push_back(row.x);
    rows.push_back(row);
  }
  Graph graph(window, params, seed, std::move(adjacency));
  bool symmetric = std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.jxy == r.jyx; });
  FeelingMap feelings(graph, symmetric);
  for (const Row& r : rows) {
    feelings.set(graph, r.x, r.y, static_cast<Spin>(r.jxy));
    feelings.set(graph, r.y, r.x, static_cast<Spin>(r.jyx));
  }
  return {std::move(graph), std::move(feelings)};
}

}  // namespace lrgame
