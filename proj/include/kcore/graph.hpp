#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kcore {

using Vertex = std::uint32_t;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Edge with the ordering key used by temporal replay.
struct TimedEdge {
  Edge edge;
  std::uint64_t timestamp = 0;
};

enum class EdgeFormat { kStatic, kTemporal };
enum class BatchKind { kInsert, kRemove };
enum class SampleMode { kUniform, kTemporalSuffix };

struct EdgeBatch {
  std::vector<Edge> edges;
  BatchKind kind = BatchKind::kInsert;
};

class GraphParseError : public std::runtime_error {
 public:
  GraphParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Undirected simple graph with one dynamic neighbor array per vertex.
///
/// Mutations on distinct vertices may run concurrently as long as the caller
/// owns both endpoints of every edge it touches; the class itself takes no
/// locks. Only the edge counter is shared, and it is atomic.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t num_vertices);

  Graph(const Graph& other);
  Graph& operator=(const Graph& other);
  Graph(Graph&& other) noexcept;
  Graph& operator=(Graph&& other) noexcept;

  std::size_t num_vertices() const noexcept { return adjacency_.size(); }
  std::size_t num_edges() const noexcept { return num_edges_.load(std::memory_order_relaxed); }

  /// Returns false, leaving the graph unchanged, for self-loops and present edges.
  bool add_edge(Vertex u, Vertex v);
  /// Swap-with-last removal from both arrays; false if the edge is absent.
  bool remove_edge(Vertex u, Vertex v);
  bool has_edge(Vertex u, Vertex v) const;

  std::span<const Vertex> neighbors(Vertex v) const { return adjacency_[v]; }
  std::size_t degree(Vertex v) const { return adjacency_[v].size(); }

  /// All edges as (min, max) pairs, sorted.
  std::vector<Edge> edges() const;

  /// Scans every adjacency array; used by tests and the verifier.
  bool check_symmetric_simple() const;

 private:
  void check_vertex(Vertex v) const;

  std::vector<std::vector<Vertex>> adjacency_;
  std::atomic<std::size_t> num_edges_{0};
};

struct LoadedGraph {
  Graph graph;
  /// internal id -> external id, in first-seen order.
  std::vector<std::uint64_t> external_ids;
  /// Deduplicated edges in internal ids; timestamps are zero for static input.
  std::vector<TimedEdge> timeline;
};

LoadedGraph load_edge_list(std::istream& in, EdgeFormat format);
LoadedGraph load_edge_list_file(const std::string& path, EdgeFormat format);

/// Writes "external_id,internal_id" rows.
void write_id_map(std::ostream& out, const LoadedGraph& loaded);

/// Draws `count` distinct existing edges. Uniform mode shuffles the sorted edge
/// set with a seeded engine; temporal-suffix mode returns the latest edges of
/// `timeline` (ties broken by load order).
EdgeBatch sample_batch(const Graph& g, std::size_t count, SampleMode mode, std::uint64_t seed,
                       std::span<const TimedEdge> timeline = {});

/// G(n, m): m distinct edges chosen uniformly.
Graph make_erdos_renyi(std::size_t n, std::size_t m, std::uint64_t seed);
/// Preferential attachment: every new vertex links to `edges_per_vertex`
/// distinct earlier vertices chosen proportionally to degree.
Graph make_barabasi_albert(std::size_t n, std::size_t edges_per_vertex, std::uint64_t seed);

}  // namespace kcore
