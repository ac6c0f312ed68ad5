#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "kcore/graph.hpp"
#include "kcore/om_list.hpp"

namespace kcore {

inline constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();
inline constexpr std::int32_t kUnknownMcd = -1;
inline constexpr std::int32_t kUnlocked = -1;

/// Removal propagation status (the low byte of the packed core word).
enum class Propagation : std::uint8_t {
  kIdle = 0,
  kPropagating = 1,
  kReady = 2,
  kRedo = 3,
};

/// Per-vertex maintenance record.
///
/// `core_status` packs the core number (high bits) with the removal status
/// (low byte) so that a demotion updates both in one store and a redo request
/// is a single compare-exchange. Everything except `deg_out` and the packed
/// word is written only by the lock owner.
struct VertexRecord {
  std::atomic<std::uint64_t> core_status{0};
  std::atomic<std::int32_t> owner{kUnlocked};
  /// Odd while the vertex's position in the k-order is being changed.
  std::atomic<std::uint32_t> epoch{0};
  /// Remaining out-degree. Atomic because removal adjusts it for neighbors
  /// the worker does not own.
  std::atomic<std::int32_t> deg_out{0};
  std::int32_t deg_in = 0;
  std::atomic<std::int32_t> mcd{kUnknownMcd};
  om::Entry entry;
};

inline constexpr std::uint64_t pack_core(std::uint32_t core, Propagation t) {
  return (static_cast<std::uint64_t>(core) << 8) | static_cast<std::uint8_t>(t);
}
inline constexpr std::uint32_t unpack_core(std::uint64_t word) {
  return static_cast<std::uint32_t>(word >> 8);
}
inline constexpr Propagation unpack_status(std::uint64_t word) {
  return static_cast<Propagation>(word & 0xff);
}

/// Graph plus core numbers, the k-order (one order list per core value) and
/// the per-vertex counters both maintenance engines operate on.
class MaintState {
 public:
  explicit MaintState(Graph g);
  MaintState(const MaintState&) = delete;
  MaintState& operator=(const MaintState&) = delete;
  MaintState(MaintState&&) noexcept = default;
  MaintState& operator=(MaintState&&) noexcept = default;
  ~MaintState();

  std::size_t num_vertices() const noexcept { return records_.size(); }
  Graph& graph() noexcept { return graph_; }
  const Graph& graph() const noexcept { return graph_; }

  VertexRecord& record(Vertex v) noexcept { return records_[v]; }
  const VertexRecord& record(Vertex v) const noexcept { return records_[v]; }

  std::uint32_t core(Vertex v) const noexcept {
    return unpack_core(records_[v].core_status.load(std::memory_order_acquire));
  }
  Propagation status(Vertex v) const noexcept {
    return unpack_status(records_[v].core_status.load(std::memory_order_acquire));
  }
  std::vector<std::uint32_t> cores() const;

  /// The list holding vertices of core k, created on first use.
  om::OrderList& list(std::uint32_t k);
  /// nullptr if no vertex ever had core k.
  om::OrderList* find_list(std::uint32_t k) const noexcept;
  std::uint32_t list_slots() const noexcept { return static_cast<std::uint32_t>(list_slots_); }

  /// k-order comparison for a quiescent state: core first, then labels.
  bool precedes(Vertex u, Vertex v) const noexcept;
  /// Same-core comparison safe against concurrent relabels (not against
  /// concurrent moves of u or v).
  bool precedes_in_list(Vertex u, Vertex v, std::uint32_t k);

  /// |{w in adj(v) : v precedes w}| from the current order.
  std::int32_t count_successors(Vertex v) const;

  /// Computes mcd[u] if unknown, counting neighbors with core >= core(u) and
  /// neighbors one core below whose removal propagation is still pending.
  /// Pending neighbors other than `source` that are mid-propagation are asked
  /// to redo their scan. u must be owned by the caller.
  void check_mcd(Vertex u, Vertex source = kNoVertex);

  /// Adds one to mcd[v] when it is known.
  void bump_known_mcd(Vertex v) noexcept;

  /// Before u leaves list k for a lower core: every same-core neighbor that
  /// precedes u loses u as a successor.
  void release_predecessors(Vertex u, std::uint32_t k);

 private:
  Graph graph_;
  std::vector<VertexRecord> records_;
  std::size_t list_slots_ = 0;
  std::unique_ptr<std::atomic<om::OrderList*>[]> lists_;
};

/// Peels the graph and lays the peel order out as per-core order lists;
/// deg_out is the successor count in that order, mcd is left unknown.
MaintState init_state(Graph g);

}  // namespace kcore
