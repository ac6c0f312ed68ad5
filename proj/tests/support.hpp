#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "kcore/graph.hpp"

namespace kcore::testing {

/// Core numbers by definition: for each k, repeatedly strip vertices with
/// fewer than k live neighbors; core[v] is the last k whose k-core kept v.
inline std::vector<std::uint32_t> naive_cores(const Graph& g) {
  const auto n = g.num_vertices();
  std::vector<std::uint32_t> core(n, 0);
  for (std::uint32_t k = 1;; ++k) {
    std::vector<char> alive(n, 1);
    bool changed = true;
    while (changed) {
      changed = false;
      for (Vertex v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        std::uint32_t deg = 0;
        for (Vertex w : g.neighbors(v)) deg += alive[w];
        if (deg < k) {
          alive[v] = 0;
          changed = true;
        }
      }
    }
    bool any = false;
    for (Vertex v = 0; v < n; ++v) {
      if (alive[v]) {
        core[v] = k;
        any = true;
      }
    }
    if (!any) return core;
  }
}

inline Graph from_edges(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges) {
  Graph g(n);
  for (auto [u, v] : edges) g.add_edge(u, v);
  return g;
}

inline Graph random_graph(std::size_t n, double p, std::mt19937_64& rng) {
  Graph g(n);
  std::bernoulli_distribution coin(p);
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      if (coin(rng)) g.add_edge(u, v);
    }
  }
  return g;
}

/// An absent, non-loop edge chosen uniformly by rejection; the graph must not
/// be complete.
inline Edge random_absent_edge(const Graph& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<Vertex> pick(0, static_cast<Vertex>(g.num_vertices() - 1));
  for (;;) {
    const Vertex u = pick(rng);
    const Vertex v = pick(rng);
    if (u != v && !g.has_edge(u, v)) return {u, v};
  }
}

inline Edge random_present_edge(const Graph& g, std::mt19937_64& rng) {
  const auto edges = g.edges();
  std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
  return edges[pick(rng)];
}

/// `count` distinct absent edges.
inline std::vector<Edge> random_absent_edges(const Graph& g, std::size_t count,
                                             std::mt19937_64& rng) {
  Graph scratch = g;
  std::vector<Edge> out;
  out.reserve(count);
  while (out.size() < count) {
    const auto e = random_absent_edge(scratch, rng);
    scratch.add_edge(e.u, e.v);
    out.push_back(e);
  }
  return out;
}

}  // namespace kcore::testing
