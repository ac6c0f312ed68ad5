#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kcore/maint_state.hpp"

namespace kcore {

/// What one maintenance step did. `searched` is |V+| for an insertion and
/// |V*| for a removal; `changed` is |V*|.
struct UpdateOutcome {
  std::uint32_t k = 0;
  std::size_t searched = 0;
  std::size_t changed = 0;
};

/// Single-threaded order-based maintenance over a MaintState.
///
/// Insertion follows the k-order from the lower endpoint with a min-heap of
/// order-list labels, admitting vertices to the candidate set (forward) or
/// evicting them and repairing the order (backward). Removal cascades
/// max-core-degree decrements. Mcd values are computed lazily and cleared
/// whenever a vertex changes core.
class SeqMaintainer {
 public:
  explicit SeqMaintainer(MaintState& state);

  /// Throws std::invalid_argument for u == v or a present edge.
  UpdateOutcome insert_edge(Vertex u, Vertex v);
  /// Throws std::invalid_argument for an absent edge.
  UpdateOutcome remove_edge(Vertex u, Vertex v);

  /// Vertices whose core changed in the last operation, in the order they
  /// joined the candidate set.
  std::span<const Vertex> last_changed() const noexcept { return changed_; }

 private:
  void forward(Vertex w);
  void backward(Vertex w);
  void do_pre(Vertex u);
  void do_post(Vertex u);
  void push_queue(Vertex v);
  Vertex pop_queue();
  void finish_insert();
  void finish_remove();
  void reset_scratch();

  MaintState& st_;
  std::uint32_t k_ = 0;

  std::vector<std::uint8_t> in_star_;
  std::vector<std::uint8_t> in_queue_;
  std::vector<std::uint8_t> in_repair_;
  std::vector<Vertex> heap_;
  std::vector<Vertex> repair_;
  std::size_t repair_head_ = 0;
  std::vector<Vertex> star_;
  std::vector<Vertex> touched_;
  std::vector<Vertex> changed_;
  std::size_t searched_ = 0;
};

}  // namespace kcore
