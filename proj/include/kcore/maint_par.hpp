#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "kcore/maint_seq.hpp"
#include "kcore/maint_state.hpp"

namespace kcore {

/// Exclusive per-vertex lock keyed by worker id. Returns false without
/// holding the lock as soon as `holds` is observed false; on success `holds`
/// was true both before and after the acquisition.
bool cond_lock(MaintState& st, Vertex x, std::int32_t worker,
               const std::function<bool()>& holds);
/// Shorthand for the common predicate "core(x) == k".
bool lock_if_core(MaintState& st, Vertex x, std::int32_t worker, std::uint32_t k);
void lock_vertex(MaintState& st, Vertex x, std::int32_t worker);
bool try_lock_vertex(MaintState& st, Vertex x, std::int32_t worker);
void unlock_vertex(MaintState& st, Vertex x, std::int32_t worker);

/// Takes both locks in ascending id order, backing off and retrying whenever
/// the second one is busy. The caller must hold neither.
void lock_pair(MaintState& st, Vertex u, Vertex v, std::int32_t worker);

/// u precedes v in the k-order at some instant during the call; retries while
/// either vertex is being moved (odd epoch) or moved under the comparison.
bool parallel_order(MaintState& st, Vertex u, Vertex v);

/// Per-worker min-priority queue over one order list.
///
/// Each member carries the label pair, epoch and list version observed when it
/// was enqueued. The members are only comparable while they share one version,
/// so any inconsistency marks the queue stale and the next dequeue refreshes
/// every snapshot under a quiet list before rebuilding the heap.
class VersionedQueue {
 public:
  struct Item {
    Vertex v = 0;
    std::uint64_t top = 0;
    std::uint64_t bottom = 0;
    std::uint32_t epoch = 0;
    std::uint64_t version = 0;
  };

  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  bool stale() const noexcept { return !version_.has_value(); }
  void clear() noexcept;

  void enqueue(MaintState& st, const om::OrderList& order, Vertex v);
  /// Returns the earliest member whose core is still k, locked by `worker`.
  /// Members that changed core are dropped; members moved since they were
  /// recorded force a refresh.
  std::optional<Vertex> dequeue(MaintState& st, const om::OrderList& order, std::uint32_t k,
                                std::int32_t worker);
  /// Re-snapshots all members against a quiet list and re-heapifies.
  void update_version(MaintState& st, const om::OrderList& order);

  std::uint64_t refreshes() const noexcept { return refreshes_; }

 private:
  static bool later(const Item& a, const Item& b) noexcept;
  static Item snapshot(const MaintState& st, Vertex v, std::uint32_t epoch, std::uint64_t version);

  std::vector<Item> heap_;
  std::optional<std::uint64_t> version_;
  std::uint64_t refreshes_ = 0;
};

/// Buckets 0..10 plus one overflow bucket.
struct SizeHistogram {
  std::array<std::uint64_t, 12> buckets{};

  void add(std::size_t size) noexcept { ++buckets[size > 10 ? 11 : size]; }
  void merge(const SizeHistogram& other) noexcept;
  std::uint64_t total() const noexcept;
  /// Fraction of samples at most 10; 1 when empty.
  double fraction_small() const noexcept;
};

/// Scratch owned by one worker; never shared.
class WorkerContext {
 public:
  WorkerContext(std::size_t num_vertices, std::int32_t id);

  std::int32_t id() const noexcept { return id_; }

  /// Inserts (u, v), which must be absent; one edge, one worker.
  UpdateOutcome insert_edge(MaintState& st, Vertex u, Vertex v);
  /// Removes (u, v), which must be present.
  UpdateOutcome remove_edge(MaintState& st, Vertex u, Vertex v);

  /// Every vertex this worker demoted since the last call.
  std::vector<Vertex> take_demoted() { return std::exchange(demoted_, {}); }

  SizeHistogram histogram;
  std::uint64_t queue_refreshes() const noexcept { return queue_.refreshes(); }

 private:
  void forward(MaintState& st, Vertex u);
  void backward(MaintState& st, Vertex w);
  void do_pre(MaintState& st, Vertex u);
  void do_post(MaintState& st, Vertex u);
  void do_mcd(MaintState& st, Vertex u);
  void hold(Vertex v);
  void release(MaintState& st, Vertex v);
  void release_all(MaintState& st);
  void reset();

  std::int32_t id_;
  std::uint32_t k_ = 0;

  VersionedQueue queue_;
  std::vector<Vertex> repair_;
  std::size_t repair_head_ = 0;
  std::vector<Vertex> star_;
  std::vector<Vertex> held_;
  std::vector<Vertex> visited_;
  std::vector<Vertex> enqueued_;
  std::vector<Vertex> demoted_;

  std::vector<std::uint8_t> in_star_;
  std::vector<std::uint8_t> in_plus_;
  std::vector<std::uint8_t> in_queue_;
  std::vector<std::uint8_t> in_repair_;
  std::vector<std::uint8_t> in_visited_;
  std::vector<std::uint8_t> held_flag_;
};

enum class EdgeStatus : std::uint8_t {
  kApplied,
  /// Insert of a present edge or removal of an absent one.
  kSkipped,
};

struct BatchOptions {
  std::size_t workers = 1;
  /// Let idle workers take edges from the unfinished chunks of others.
  bool steal = false;
};

struct BatchResult {
  std::vector<EdgeStatus> status;
  SizeHistogram histogram;
  /// Removal only: times the appended order of demoted vertices had to be
  /// re-peeled at the end of the batch to restore order validity.
  std::size_t order_repairs = 0;
  std::uint64_t queue_refreshes = 0;
};

/// Inserts every edge of the batch with `workers` threads, each taking a
/// contiguous chunk. Throws std::invalid_argument for self-loops and edges
/// repeated within the batch, std::out_of_range for unknown vertices.
BatchResult parallel_insert_batch(MaintState& st, std::span<const Edge> edges,
                                  const BatchOptions& options = {});
/// Removal counterpart of parallel_insert_batch.
BatchResult parallel_remove_batch(MaintState& st, std::span<const Edge> edges,
                                  const BatchOptions& options = {});

}  // namespace kcore
