#include "kcore/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace kcore {

namespace {

std::uint64_t edge_key(Vertex u, Vertex v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

bool erase_neighbor(std::vector<Vertex>& list, Vertex target) {
  auto it = std::find(list.begin(), list.end(), target);
  if (it == list.end()) return false;
  *it = list.back();
  list.pop_back();
  return true;
}

}  // namespace

Graph::Graph(std::size_t num_vertices) : adjacency_(num_vertices) {}

Graph::Graph(const Graph& other) : adjacency_(other.adjacency_), num_edges_(other.num_edges()) {}

Graph& Graph::operator=(const Graph& other) {
  if (this != &other) {
    adjacency_ = other.adjacency_;
    num_edges_.store(other.num_edges(), std::memory_order_relaxed);
  }
  return *this;
}

Graph::Graph(Graph&& other) noexcept
    : adjacency_(std::move(other.adjacency_)), num_edges_(other.num_edges()) {
  other.num_edges_.store(0, std::memory_order_relaxed);
}

Graph& Graph::operator=(Graph&& other) noexcept {
  if (this != &other) {
    adjacency_ = std::move(other.adjacency_);
    num_edges_.store(other.num_edges(), std::memory_order_relaxed);
    other.num_edges_.store(0, std::memory_order_relaxed);
  }
  return *this;
}

void Graph::check_vertex(Vertex v) const {
  if (v >= adjacency_.size()) {
    throw std::out_of_range("vertex " + std::to_string(v) + " out of range (n=" +
                            std::to_string(adjacency_.size()) + ")");
  }
}

bool Graph::add_edge(Vertex u, Vertex v) {
  check_vertex(u);
  check_vertex(v);
  if (u == v || has_edge(u, v)) return false;
  adjacency_[u].push_back(v);
  adjacency_[v].push_back(u);
  num_edges_.fetch_add(1, std::memory_order_relaxed);
  return true;
}

bool Graph::remove_edge(Vertex u, Vertex v) {
  check_vertex(u);
  check_vertex(v);
  if (u == v) return false;
  if (!erase_neighbor(adjacency_[u], v)) return false;
  erase_neighbor(adjacency_[v], u);
  num_edges_.fetch_sub(1, std::memory_order_relaxed);
  return true;
}

bool Graph::has_edge(Vertex u, Vertex v) const {
  check_vertex(u);
  check_vertex(v);
  // scan the shorter list
  const auto& a = adjacency_[u].size() <= adjacency_[v].size() ? adjacency_[u] : adjacency_[v];
  const Vertex target = &a == &adjacency_[u] ? v : u;
  return std::find(a.begin(), a.end(), target) != a.end();
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (Vertex u = 0; u < adjacency_.size(); ++u) {
    for (Vertex v : adjacency_[u]) {
      if (u < v) out.push_back({u, v});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Graph::check_symmetric_simple() const {
  std::size_t total = 0;
  for (Vertex u = 0; u < adjacency_.size(); ++u) {
    std::unordered_set<Vertex> seen;
    for (Vertex v : adjacency_[u]) {
      if (v >= adjacency_.size() || v == u || !seen.insert(v).second) return false;
      const auto& back = adjacency_[v];
      if (std::find(back.begin(), back.end(), u) == back.end()) return false;
    }
    total += adjacency_[u].size();
  }
  return total == 2 * num_edges();
}

LoadedGraph load_edge_list(std::istream& in, EdgeFormat format) {
  const std::size_t want = format == EdgeFormat::kTemporal ? 3 : 2;
  std::unordered_map<std::uint64_t, Vertex> ids;
  std::vector<std::uint64_t> external;
  std::vector<TimedEdge> raw;

  auto intern = [&](std::uint64_t ext) {
    auto [it, fresh] = ids.try_emplace(ext, static_cast<Vertex>(external.size()));
    if (fresh) external.push_back(ext);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view rest(line);
    const auto first = rest.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    if (rest[first] == '#' || rest[first] == '%') continue;

    std::uint64_t fields[3] = {0, 0, 0};
    std::size_t count = 0;
    std::size_t pos = first;
    while (pos < rest.size()) {
      const auto end = std::min(rest.find_first_of(" \t\r,", pos), rest.size());
      const auto token = rest.substr(pos, end - pos);
      if (count == want) throw GraphParseError(lineno, "too many fields");
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), fields[count]);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw GraphParseError(lineno, "expected a non-negative integer, got '" +
                                          std::string(token) + "'");
      }
      ++count;
      pos = rest.find_first_not_of(" \t\r,", end);
      if (pos == std::string_view::npos) break;
    }
    if (count != want) {
      throw GraphParseError(lineno, "expected " + std::to_string(want) + " fields, got " +
                                        std::to_string(count));
    }
    const Vertex a = intern(fields[0]);
    const Vertex b = intern(fields[1]);
    raw.push_back({{a, b}, fields[2]});
  }

  LoadedGraph out;
  out.graph = Graph(external.size());
  out.external_ids = std::move(external);
  std::unordered_map<std::uint64_t, std::size_t> position;
  for (const auto& te : raw) {
    const auto [a, b] = te.edge;
    if (out.graph.add_edge(a, b)) {
      position.emplace(edge_key(a, b), out.timeline.size());
      out.timeline.push_back({{std::min(a, b), std::max(a, b)}, te.timestamp});
    } else if (a != b) {
      // repeated edge: keep the latest timestamp
      auto& kept = out.timeline[position.at(edge_key(a, b))];
      kept.timestamp = std::max(kept.timestamp, te.timestamp);
    }
  }
  return out;
}

LoadedGraph load_edge_list_file(const std::string& path, EdgeFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
  return load_edge_list(in, format);
}

void write_id_map(std::ostream& out, const LoadedGraph& loaded) {
  out << "external_id,internal_id\n";
  for (std::size_t i = 0; i < loaded.external_ids.size(); ++i) {
    out << loaded.external_ids[i] << ',' << i << '\n';
  }
}

EdgeBatch sample_batch(const Graph& g, std::size_t count, SampleMode mode, std::uint64_t seed,
                       std::span<const TimedEdge> timeline) {
  if (count > g.num_edges()) {
    throw std::invalid_argument("sample size " + std::to_string(count) + " exceeds edge count " +
                                std::to_string(g.num_edges()));
  }
  EdgeBatch batch;
  batch.kind = BatchKind::kRemove;
  if (count == 0) return batch;

  if (mode == SampleMode::kTemporalSuffix) {
    std::vector<std::size_t> idx;
    idx.reserve(timeline.size());
    for (std::size_t i = 0; i < timeline.size(); ++i) {
      if (g.has_edge(timeline[i].edge.u, timeline[i].edge.v)) idx.push_back(i);
    }
    if (idx.size() < count) {
      throw std::invalid_argument("timeline holds fewer present edges than the sample size");
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return timeline[a].timestamp < timeline[b].timestamp;
    });
    for (std::size_t i = idx.size() - count; i < idx.size(); ++i) {
      batch.edges.push_back(timeline[idx[i]].edge);
    }
    return batch;
  }

  auto all = g.edges();
  std::mt19937_64 rng(seed);
  // partial Fisher-Yates
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(count);
  batch.edges = std::move(all);
  return batch;
}

Graph make_erdos_renyi(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 2 && m > 0) throw std::invalid_argument("G(n,m) needs n >= 2");
  if (m > n * (n - 1) / 2) throw std::invalid_argument("G(n,m): m exceeds n(n-1)/2");
  Graph g(n);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Vertex> pick(0, static_cast<Vertex>(n - 1));
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(m * 2);
  std::vector<Edge> picked;
  picked.reserve(m);
  while (picked.size() < m) {
    const Vertex a = pick(rng);
    const Vertex b = pick(rng);
    if (a == b || !seen.insert(edge_key(a, b)).second) continue;
    picked.push_back({a, b});
  }
  for (auto [a, b] : picked) g.add_edge(a, b);
  return g;
}

Graph make_barabasi_albert(std::size_t n, std::size_t edges_per_vertex, std::uint64_t seed) {
  const std::size_t k = edges_per_vertex;
  if (k == 0 || n <= k) throw std::invalid_argument("preferential attachment needs n > k > 0");
  Graph g(n);
  std::mt19937_64 rng(seed);
  // every endpoint occurrence, so uniform picks are degree-proportional
  std::vector<Vertex> endpoints;
  endpoints.reserve(2 * n * k);
  // seed clique on k + 1 vertices
  for (Vertex a = 0; a <= k; ++a) {
    for (Vertex b = a + 1; b <= k; ++b) {
      g.add_edge(a, b);
      endpoints.push_back(a);
      endpoints.push_back(b);
    }
  }
  std::vector<Vertex> targets;
  for (Vertex v = static_cast<Vertex>(k + 1); v < n; ++v) {
    targets.clear();
    while (targets.size() < k) {
      std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
      const Vertex t = endpoints[pick(rng)];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (Vertex t : targets) {
      g.add_edge(v, t);
      endpoints.push_back(v);
      endpoints.push_back(t);
    }
  }
  return g;
}

}  // namespace kcore
