#pragma once

#include <cstdint>
#include <vector>

#include "kcore/graph.hpp"

namespace kcore {

struct CoreAssignment {
  std::vector<std::uint32_t> core;
  /// Vertices in the order they were peeled; core numbers are non-decreasing
  /// along it, so vertices of one core value are contiguous.
  std::vector<Vertex> peel_order;
};

/// Bucket-queue peeling in O(n + m). Vertices sharing a current degree leave
/// their bucket first-in first-out.
CoreAssignment bz_decompose(const Graph& g);

}  // namespace kcore
