#include "kcore/om_list.hpp"

#include <algorithm>
#include <bit>
#include <mutex>

namespace kcore::om {

namespace {

constexpr std::uint64_t kMaxItems = std::uint64_t{1} << 31;
constexpr std::uint64_t kMinItems = 64;

}  // namespace

OrderList::OrderList(std::uint32_t key, std::uint64_t max_items) : key_(key) {
  if (max_items > kMaxItems) throw CapacityError("order list sized beyond 2^31 items");
  const std::uint64_t n = std::max(max_items, kMinItems);
  bottom_max_ = n;
  top_max_ = n * n;
  capacity_ = std::max<std::uint32_t>(static_cast<std::uint32_t>(std::bit_width(n - 1)), 4);
}

void OrderList::begin_relabel() {
  in_flight_.fetch_add(1, std::memory_order_acq_rel);
  version_.fetch_add(1, std::memory_order_acq_rel);
}

void OrderList::end_relabel() {
  version_.fetch_add(1, std::memory_order_acq_rel);
  in_flight_.fetch_sub(1, std::memory_order_acq_rel);
  relabels_.fetch_add(1, std::memory_order_relaxed);
}

void OrderList::force_relabel_bracket() {
  std::lock_guard guard(mutex_);
  begin_relabel();
  end_relabel();
}

bool OrderList::precedes(const Entry& x, const Entry& y) noexcept {
  const Group* gx = x.group.load(std::memory_order_acquire);
  const Group* gy = y.group.load(std::memory_order_acquire);
  if (gx == nullptr || gy == nullptr) return false;
  const auto tx = gx->label.load(std::memory_order_relaxed);
  const auto ty = gy->label.load(std::memory_order_relaxed);
  if (tx != ty) return tx < ty;
  return x.label.load(std::memory_order_relaxed) < y.label.load(std::memory_order_relaxed);
}

bool OrderList::precedes_stable(const Entry& x, const Entry& y) const noexcept {
  Backoff backoff;
  for (;;) {
    const auto before = version_.load(std::memory_order_acquire);
    if ((before & 1) == 0 && in_flight_.load(std::memory_order_acquire) == 0) {
      const bool result = precedes(x, y);
      std::atomic_thread_fence(std::memory_order_acquire);
      if (version_.load(std::memory_order_relaxed) == before &&
          in_flight_.load(std::memory_order_relaxed) == 0) {
        return result;
      }
    }
    backoff.pause();
  }
}

Group* OrderList::allocate_group() {
  Group* g;
  if (!free_groups_.empty()) {
    g = free_groups_.back();
    free_groups_.pop_back();
  } else {
    g = &pool_.emplace_back();
  }
  g->prev = g->next = nullptr;
  g->first = g->last = nullptr;
  g->size = 0;
  g->owner = this;
  return g;
}

std::uint64_t OrderList::top_of(const Group* g, bool upper) const noexcept {
  if (g == nullptr) return upper ? top_max_ : 0;
  return g->label.load(std::memory_order_relaxed);
}

Group* OrderList::new_group_after(Group* g) {
  Group* fresh = allocate_group();
  Group* next = g ? g->next : first_group_;
  const auto lo = top_of(g, false);
  const auto hi = top_of(next, true);
  fresh->label.store(lo + (hi - lo) / 2, std::memory_order_relaxed);
  fresh->prev = g;
  fresh->next = next;
  if (g) g->next = fresh; else first_group_ = fresh;
  if (next) next->prev = fresh; else last_group_ = fresh;
  return fresh;
}

void OrderList::unlink_group(Group& g) {
  if (g.prev) g.prev->next = g.next; else first_group_ = g.next;
  if (g.next) g.next->prev = g.prev; else last_group_ = g.prev;
  g.prev = g.next = nullptr;
  g.first = g.last = nullptr;
  free_groups_.push_back(&g);
}

// Caller holds the lock and an open relabel bracket.
void OrderList::ensure_gap_after(Group* g) {
  const auto lo = top_of(g, false);
  Group* next = g ? g->next : first_group_;
  if (top_of(next, true) - lo >= 2) return;

  rebalances_.fetch_add(1, std::memory_order_relaxed);
  std::uint64_t j = 1;
  Group* q = next;
  while (q != nullptr && q->label.load(std::memory_order_relaxed) - lo <= j * j) {
    q = q->next;
    ++j;
  }
  const auto hi = top_of(q, true);
  if (hi - lo <= j * j) {
    // ran off the end without enough room: spread every group evenly
    std::uint64_t total = 0;
    for (Group* r = first_group_; r; r = r->next) ++total;
    const auto gap = top_max_ / (total + 1);
    if (gap < 2) throw CapacityError("order list top-label space exhausted");
    std::uint64_t i = 1;
    for (Group* r = first_group_; r; r = r->next, ++i) {
      r->label.store(i * gap, std::memory_order_relaxed);
    }
    moved_.fetch_add(total, std::memory_order_relaxed);
    return;
  }
  const auto gap = (hi - lo) / j;
  Group* r = next;
  for (std::uint64_t i = 1; i < j; ++i, r = r->next) {
    r->label.store(lo + i * gap, std::memory_order_relaxed);
  }
  moved_.fetch_add(j - 1, std::memory_order_relaxed);
}

void OrderList::relabel_group(Group& g) {
  begin_relabel();
  const auto gap = bottom_max_ / (g.size + 1);
  std::uint64_t i = 1;
  for (Entry* e = g.first;; e = e->next, ++i) {
    e->label.store(i * gap, std::memory_order_relaxed);
    if (e == g.last) break;
  }
  moved_.fetch_add(g.size, std::memory_order_relaxed);
  end_relabel();
}

void OrderList::split(Group& g) {
  begin_relabel();
  ensure_gap_after(&g);
  Group* half = new_group_after(&g);

  const std::uint32_t keep = (g.size + 1) / 2;
  Entry* cut = g.first;
  for (std::uint32_t i = 1; i < keep; ++i) cut = cut->next;

  half->first = cut->next;
  half->last = g.last;
  half->size = g.size - keep;
  g.last = cut;
  g.size = keep;

  auto spread = [this](Group& target) {
    const auto gap = bottom_max_ / (target.size + 1);
    std::uint64_t i = 1;
    for (Entry* e = target.first;; e = e->next, ++i) {
      e->label.store(i * gap, std::memory_order_relaxed);
      e->group.store(&target, std::memory_order_relaxed);
      if (e == target.last) break;
    }
  };
  spread(g);
  if (half->size > 0) spread(*half);
  moved_.fetch_add(g.size + half->size, std::memory_order_relaxed);
  splits_.fetch_add(1, std::memory_order_relaxed);
  end_relabel();
}

void OrderList::link_after(Group& g, Entry* x, Entry& y) {
  if (x) {
    y.prev = x;
    y.next = x->next;
    if (x->next) x->next->prev = &y;
    x->next = &y;
    if (g.last == x) g.last = &y;
  } else {
    y.prev = nullptr;
    y.next = g.first;
    if (g.first) g.first->prev = &y;
    g.first = &y;
    if (g.last == nullptr) g.last = &y;
  }
  ++g.size;
}

void OrderList::insert_locked(Entry* x, Entry& y) {
  if (y.linked()) throw std::logic_error("order-list insert of an entry that is already linked");
  if (x && (x->group.load(std::memory_order_relaxed) == nullptr ||
            x->group.load(std::memory_order_relaxed)->owner != this)) {
    throw std::logic_error("order-list insert after an entry of another list");
  }
  if (first_group_ == nullptr) {
    Group* g = new_group_after(nullptr);
    link_after(*g, nullptr, y);
    y.label.store(bottom_max_ / 2, std::memory_order_relaxed);
    y.group.store(g, std::memory_order_release);
    size_.fetch_add(1, std::memory_order_relaxed);
    return;
  }
  for (;;) {
    Group* g = x ? x->group.load(std::memory_order_relaxed) : first_group_;
    if (g->size >= capacity_) {
      split(*g);
      continue;
    }
    const std::uint64_t lo = x ? x->label.load(std::memory_order_relaxed) : 0;
    Entry* after = x ? x->next : g->first;
    const bool same_group = after && after->group.load(std::memory_order_relaxed) == g;
    const std::uint64_t hi = same_group ? after->label.load(std::memory_order_relaxed) : bottom_max_;
    link_after(*g, x, y);
    if (hi - lo >= 2) {
      y.label.store(lo + (hi - lo) / 2, std::memory_order_relaxed);
      y.group.store(g, std::memory_order_release);
    } else {
      y.group.store(g, std::memory_order_release);
      relabel_group(*g);
    }
    size_.fetch_add(1, std::memory_order_relaxed);
    return;
  }
}

void OrderList::insert_after(Entry& x, Entry& y) {
  std::lock_guard guard(mutex_);
  insert_locked(&x, y);
}

void OrderList::insert_head(Entry& y) {
  std::lock_guard guard(mutex_);
  insert_locked(nullptr, y);
}

void OrderList::insert_tail(Entry& y) {
  std::lock_guard guard(mutex_);
  insert_locked(last_group_ ? last_group_->last : nullptr, y);
}

void OrderList::insert_head_run(std::span<Entry* const> ys) {
  if (ys.empty()) return;
  std::lock_guard guard(mutex_);
  Entry* prev = nullptr;
  for (Entry* y : ys) {
    insert_locked(prev, *y);
    prev = y;
  }
}

void OrderList::insert_tail_run(std::span<Entry* const> ys) {
  if (ys.empty()) return;
  std::lock_guard guard(mutex_);
  Entry* prev = last_group_ ? last_group_->last : nullptr;
  for (Entry* y : ys) {
    insert_locked(prev, *y);
    prev = y;
  }
}

void OrderList::erase(Entry& x) {
  std::lock_guard guard(mutex_);
  Group* g = x.group.load(std::memory_order_relaxed);
  if (g == nullptr || g->owner != this) {
    throw std::logic_error("order-list erase of an entry not in this list");
  }
  if (g->first == &x) {
    g->first = (x.next && x.next->group.load(std::memory_order_relaxed) == g) ? x.next : nullptr;
  }
  if (g->last == &x) {
    g->last = (x.prev && x.prev->group.load(std::memory_order_relaxed) == g) ? x.prev : nullptr;
  }
  if (x.prev) x.prev->next = x.next;
  if (x.next) x.next->prev = x.prev;
  x.prev = x.next = nullptr;
  x.group.store(nullptr, std::memory_order_release);
  --g->size;
  if (g->size == 0) unlink_group(*g);
  size_.fetch_sub(1, std::memory_order_relaxed);
}

std::vector<const Entry*> OrderList::entries() const {
  std::vector<const Entry*> out;
  out.reserve(size());
  for (const Entry* e = front(); e; e = e->next) out.push_back(e);
  return out;
}

AuditReport OrderList::audit() const {
  std::lock_guard guard(mutex_);
  AuditReport report;
  auto fail = [&](std::string what) {
    report.ok = false;
    report.error = "list " + std::to_string(key_) + ": " + std::move(what);
    return report;
  };
  if (version_.load() % 2 != 0) return fail("odd version at rest");
  if (in_flight_.load() != 0) return fail("relabel count nonzero at rest");

  std::uint64_t prev_top = 0;
  const Group* prev_group = nullptr;
  const Entry* expected_first = front();
  for (const Group* g = first_group_; g; prev_group = g, g = g->next) {
    ++report.groups;
    const auto top = g->label.load();
    if (g->owner != this) return fail("group owned by another list");
    if (g->prev != prev_group) return fail("broken group back-link");
    if (top <= prev_top || top >= top_max_) return fail("top labels not strictly increasing");
    if (g->size == 0 || g->size > capacity_) {
      return fail("group size " + std::to_string(g->size) + " outside [1, " +
                  std::to_string(capacity_) + "]");
    }
    if (g->first != expected_first) return fail("group not contiguous with its predecessor");
    std::uint64_t prev_bottom = 0;
    std::uint32_t count = 0;
    const Entry* e = g->first;
    for (;; e = e->next) {
      if (e == nullptr) return fail("group runs off the entry list");
      ++count;
      if (e->group.load() != g) return fail("entry points at the wrong group");
      const auto bottom = e->label.load();
      if (bottom <= prev_bottom || bottom >= bottom_max_) {
        return fail("bottom labels not strictly increasing");
      }
      prev_bottom = bottom;
      if (e == g->last) break;
    }
    if (count != g->size) return fail("group size field disagrees with its members");
    report.entries += count;
    expected_first = g->last->next;
    prev_top = top;
  }
  if (expected_first != nullptr) return fail("entries trail the last group");
  if (report.entries != size()) return fail("size field disagrees with traversal");
  return report;
}

ListStats OrderList::stats() const {
  return {relabels_.load(), splits_.load(), rebalances_.load(), moved_.load()};
}

}  // namespace kcore::om
