#include "kcore/core_decomp.hpp"

#include <algorithm>

namespace kcore {

CoreAssignment bz_decompose(const Graph& g) {
  const std::size_t n = g.num_vertices();
  CoreAssignment out;
  out.core.assign(n, 0);
  out.peel_order.reserve(n);
  if (n == 0) return out;

  std::vector<std::uint32_t> degree(n);
  std::size_t max_degree = 0;
  for (Vertex v = 0; v < n; ++v) {
    degree[v] = static_cast<std::uint32_t>(g.degree(v));
    max_degree = std::max<std::size_t>(max_degree, degree[v]);
  }

  // FIFO buckets with lazy deletion: a vertex is re-pushed on each decrement
  // and stale copies are skipped when popped.
  std::vector<std::vector<Vertex>> bucket(max_degree + 1);
  std::vector<std::size_t> head(max_degree + 1, 0);
  for (Vertex v = 0; v < n; ++v) bucket[degree[v]].push_back(v);

  std::vector<char> removed(n, 0);
  std::size_t level = 0;
  while (out.peel_order.size() < n) {
    while (head[level] == bucket[level].size()) ++level;
    const Vertex u = bucket[level][head[level]++];
    if (removed[u] || degree[u] != level) continue;
    removed[u] = 1;
    out.core[u] = static_cast<std::uint32_t>(level);
    out.peel_order.push_back(u);
    for (Vertex w : g.neighbors(u)) {
      if (!removed[w] && degree[w] > level) {
        --degree[w];
        bucket[degree[w]].push_back(w);
      }
    }
  }
  return out;
}

}  // namespace kcore
