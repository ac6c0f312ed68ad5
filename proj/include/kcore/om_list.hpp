#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kcore/spin.hpp"

namespace kcore::om {

class OrderList;
struct Group;

/// One item of an order list. Readers may inspect `group` and `label` at any
/// time without locks; links are owned by the list lock.
struct Entry {
  std::atomic<Group*> group{nullptr};
  std::atomic<std::uint64_t> label{0};
  Entry* prev = nullptr;
  Entry* next = nullptr;

  bool linked() const noexcept { return group.load(std::memory_order_acquire) != nullptr; }
};

struct Group {
  std::atomic<std::uint64_t> label{0};
  Group* prev = nullptr;
  Group* next = nullptr;
  Entry* first = nullptr;
  Entry* last = nullptr;
  std::uint32_t size = 0;
  const OrderList* owner = nullptr;
};

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct AuditReport {
  bool ok = true;
  std::string error;
  std::size_t entries = 0;
  std::size_t groups = 0;
};

struct ListStats {
  std::uint64_t relabels = 0;
  std::uint64_t splits = 0;
  std::uint64_t rebalances = 0;
  /// Labels rewritten by relabels, entries and groups together.
  std::uint64_t moved = 0;
};

/// Two-level order-maintenance list.
///
/// Groups carry top labels in (0, N^2) and entries carry bottom labels in
/// (0, N); an entry x precedes y iff (top(x), bottom(x)) < (top(y), bottom(y)).
/// A group holds at most max(ceil(log2 N), 4) entries. When an insertion finds
/// no bottom-label gap the group is relabeled uniformly, or split in halves
/// when full; a split that finds no top-label gap first rebalances the
/// following groups until their label span exceeds j^2 for j groups visited.
///
/// Mutations serialize on one lock per list. `precedes` is lock-free;
/// `precedes_stable` additionally retries across concurrent relabels using
/// the version counter, which is odd while a relabel is in flight, and the
/// in-flight relabel count.
class OrderList {
 public:
  explicit OrderList(std::uint32_t key = 0, std::uint64_t max_items = 1 << 20);
  OrderList(const OrderList&) = delete;
  OrderList& operator=(const OrderList&) = delete;

  std::uint32_t key() const noexcept { return key_; }
  std::uint32_t group_capacity() const noexcept { return capacity_; }
  std::uint64_t bottom_limit() const noexcept { return bottom_max_; }
  std::uint64_t top_limit() const noexcept { return top_max_; }

  /// Places y immediately after x.
  void insert_after(Entry& x, Entry& y);
  void insert_head(Entry& y);
  void insert_tail(Entry& y);
  /// Places ys, in order, at the front (resp. back) under one lock hold.
  void insert_head_run(std::span<Entry* const> ys);
  void insert_tail_run(std::span<Entry* const> ys);
  void erase(Entry& x);

  /// Raw label comparison; entries must belong to this list.
  static bool precedes(const Entry& x, const Entry& y) noexcept;
  /// Label comparison validated against concurrent relabels of this list.
  bool precedes_stable(const Entry& x, const Entry& y) const noexcept;

  std::uint64_t version() const noexcept { return version_.load(std::memory_order_acquire); }
  std::uint32_t relabels_in_flight() const noexcept {
    return in_flight_.load(std::memory_order_acquire);
  }

  std::size_t size() const noexcept { return size_.load(std::memory_order_relaxed); }
  bool empty() const noexcept { return size() == 0; }

  /// Quiescent traversal.
  Entry* front() const noexcept { return first_group_ ? first_group_->first : nullptr; }
  std::vector<const Entry*> entries() const;

  AuditReport audit() const;
  ListStats stats() const;

  /// Test hook: runs an empty relabel bracket so readers observe a version bump.
  void force_relabel_bracket();

 private:
  void insert_locked(Entry* x, Entry& y);
  void link_after(Group& g, Entry* x, Entry& y);
  void relabel_group(Group& g);
  void split(Group& g);
  void ensure_gap_after(Group* g);
  Group* new_group_after(Group* g);
  void unlink_group(Group& g);
  Group* allocate_group();
  std::uint64_t top_of(const Group* g, bool upper) const noexcept;
  void begin_relabel();
  void end_relabel();

  std::uint32_t key_;
  std::uint64_t bottom_max_;
  std::uint64_t top_max_;
  std::uint32_t capacity_;

  mutable SpinLock mutex_;
  std::atomic<std::uint64_t> version_{0};
  std::atomic<std::uint32_t> in_flight_{0};
  std::atomic<std::size_t> size_{0};

  Group* first_group_ = nullptr;
  Group* last_group_ = nullptr;
  std::deque<Group> pool_;
  std::vector<Group*> free_groups_;

  std::atomic<std::uint64_t> relabels_{0};
  std::atomic<std::uint64_t> splits_{0};
  std::atomic<std::uint64_t> rebalances_{0};
  std::atomic<std::uint64_t> moved_{0};
};

}  // namespace kcore::om
