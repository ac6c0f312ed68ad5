#include "kcore/maint_seq.hpp"

#include <algorithm>
#include <stdexcept>

namespace kcore {

SeqMaintainer::SeqMaintainer(MaintState& state)
    : st_(state),
      in_star_(state.num_vertices(), 0),
      in_queue_(state.num_vertices(), 0),
      in_repair_(state.num_vertices(), 0) {}

void SeqMaintainer::reset_scratch() {
  for (Vertex x : star_) {
    in_star_[x] = 0;
    st_.record(x).deg_in = 0;
  }
  for (Vertex x : touched_) {
    in_queue_[x] = 0;
    st_.record(x).deg_in = 0;
  }
  for (Vertex x : repair_) in_repair_[x] = 0;
  star_.clear();
  touched_.clear();
  repair_.clear();
  repair_head_ = 0;
  heap_.clear();
  changed_.clear();
  searched_ = 0;
}

void SeqMaintainer::push_queue(Vertex v) {
  in_queue_[v] = 1;
  touched_.push_back(v);
  heap_.push_back(v);
  // std heaps are max-heaps, so invert the order to keep the earliest vertex on top
  std::push_heap(heap_.begin(), heap_.end(), [this](Vertex a, Vertex b) {
    return om::OrderList::precedes(st_.record(b).entry, st_.record(a).entry);
  });
}

Vertex SeqMaintainer::pop_queue() {
  std::pop_heap(heap_.begin(), heap_.end(), [this](Vertex a, Vertex b) {
    return om::OrderList::precedes(st_.record(b).entry, st_.record(a).entry);
  });
  const Vertex w = heap_.back();
  heap_.pop_back();
  in_queue_[w] = 0;
  return w;
}

UpdateOutcome SeqMaintainer::insert_edge(Vertex u, Vertex v) {
  if (u == v) throw std::invalid_argument("self-loop insertion");
  if (st_.graph().has_edge(u, v)) throw std::invalid_argument("edge already present");
  if (!st_.precedes(u, v)) std::swap(u, v);

  reset_scratch();
  k_ = st_.core(u);
  st_.graph().add_edge(u, v);
  auto& ru = st_.record(u);
  ru.deg_out.fetch_add(1, std::memory_order_relaxed);
  st_.bump_known_mcd(u);
  if (st_.core(v) == k_) st_.bump_known_mcd(v);

  if (ru.deg_out.load(std::memory_order_relaxed) <= static_cast<std::int32_t>(k_)) {
    return {k_, 0, 0};
  }

  push_queue(u);
  const auto k = static_cast<std::int32_t>(k_);
  while (!heap_.empty()) {
    const Vertex w = pop_queue();
    const auto& rw = st_.record(w);
    const auto out = rw.deg_out.load(std::memory_order_relaxed);
    if (rw.deg_in + out > k) {
      forward(w);
    } else if (rw.deg_in > 0) {
      backward(w);
    }
  }
  finish_insert();
  return {k_, searched_, changed_.size()};
}

void SeqMaintainer::forward(Vertex w) {
  in_star_[w] = 1;
  star_.push_back(w);
  ++searched_;
  const auto& ew = st_.record(w).entry;
  for (Vertex x : st_.graph().neighbors(w)) {
    if (st_.core(x) != k_ || !om::OrderList::precedes(ew, st_.record(x).entry)) continue;
    st_.record(x).deg_in += 1;
    if (!in_queue_[x]) push_queue(x);
  }
}

void SeqMaintainer::backward(Vertex w) {
  ++searched_;
  auto& order = st_.list(k_);
  Vertex pre = w;
  do_pre(w);
  auto absorb = [this](Vertex x) {
    auto& rec = st_.record(x);
    rec.deg_out.fetch_add(rec.deg_in, std::memory_order_relaxed);
    rec.deg_in = 0;
  };
  absorb(w);
  while (repair_head_ < repair_.size()) {
    const Vertex x = repair_[repair_head_++];
    in_star_[x] = 0;
    do_pre(x);
    do_post(x);
    order.erase(st_.record(x).entry);
    order.insert_after(st_.record(pre).entry, st_.record(x).entry);
    pre = x;
    absorb(x);
  }
}

void SeqMaintainer::do_pre(Vertex u) {
  const auto k = static_cast<std::int32_t>(k_);
  const auto& eu = st_.record(u).entry;
  for (Vertex x : st_.graph().neighbors(u)) {
    if (!in_star_[x]) continue;
    auto& rx = st_.record(x);
    if (!om::OrderList::precedes(rx.entry, eu)) continue;
    const auto out = rx.deg_out.fetch_sub(1, std::memory_order_relaxed) - 1;
    if (rx.deg_in + out <= k && !in_repair_[x]) {
      in_repair_[x] = 1;
      repair_.push_back(x);
    }
  }
}

void SeqMaintainer::do_post(Vertex u) {
  const auto k = static_cast<std::int32_t>(k_);
  const auto& eu = st_.record(u).entry;
  for (Vertex x : st_.graph().neighbors(u)) {
    auto& rx = st_.record(x);
    if (rx.deg_in <= 0 || st_.core(x) != k_) continue;
    if (!om::OrderList::precedes(eu, rx.entry)) continue;
    rx.deg_in -= 1;
    if (in_star_[x] && rx.deg_in + rx.deg_out.load(std::memory_order_relaxed) <= k &&
        !in_repair_[x]) {
      in_repair_[x] = 1;
      repair_.push_back(x);
    }
  }
}

void SeqMaintainer::finish_insert() {
  // V* joined in dequeue order, which is k-order; evicted vertices are dropped
  for (Vertex w : star_) {
    if (in_star_[w]) changed_.push_back(w);
  }
  if (changed_.empty()) return;

  auto& from = st_.list(k_);
  auto& to = st_.list(k_ + 1);
  std::vector<om::Entry*> run;
  run.reserve(changed_.size());
  for (Vertex w : changed_) {
    auto& rec = st_.record(w);
    rec.epoch.fetch_add(1, std::memory_order_relaxed);
    from.erase(rec.entry);
    rec.core_status.store(pack_core(k_ + 1, Propagation::kIdle), std::memory_order_relaxed);
    rec.deg_in = 0;
    rec.mcd.store(kUnknownMcd, std::memory_order_relaxed);
    run.push_back(&rec.entry);
  }
  to.insert_head_run(run);
  for (Vertex w : changed_) {
    st_.record(w).epoch.fetch_add(1, std::memory_order_relaxed);
    for (Vertex x : st_.graph().neighbors(w)) {
      if (!in_star_[x] && st_.core(x) == k_ + 1) st_.bump_known_mcd(x);
    }
  }
}

UpdateOutcome SeqMaintainer::remove_edge(Vertex u, Vertex v) {
  if (!st_.graph().has_edge(u, v)) throw std::invalid_argument("edge not present");

  reset_scratch();
  const auto cu = st_.core(u);
  const auto cv = st_.core(v);
  k_ = std::min(cu, cv);
  st_.check_mcd(u);
  st_.check_mcd(v);
  if (st_.precedes(u, v)) {
    st_.record(u).deg_out.fetch_sub(1, std::memory_order_relaxed);
  } else {
    st_.record(v).deg_out.fetch_sub(1, std::memory_order_relaxed);
  }
  st_.graph().remove_edge(u, v);

  const auto k = static_cast<std::int32_t>(k_);
  auto admit = [&](Vertex x) {
    in_star_[x] = 1;
    star_.push_back(x);
    repair_.push_back(x);
  };
  auto drop_one = [&](Vertex x) {
    auto& mcd = st_.record(x).mcd;
    const auto left = mcd.fetch_sub(1, std::memory_order_relaxed) - 1;
    if (left < k) admit(x);
  };
  if (cv >= cu) drop_one(u);
  if (cu >= cv) drop_one(v);

  while (repair_head_ < repair_.size()) {
    const Vertex w = repair_[repair_head_++];
    for (Vertex x : st_.graph().neighbors(w)) {
      if (in_star_[x] || st_.core(x) != k_) continue;
      st_.check_mcd(x);
      drop_one(x);
    }
  }
  // repair_ doubles as the removal queue; its flags are unused here
  repair_.clear();
  repair_head_ = 0;
  finish_remove();
  return {k_, star_.size(), star_.size()};
}

void SeqMaintainer::finish_remove() {
  changed_.assign(star_.begin(), star_.end());
  if (changed_.empty()) return;

  for (Vertex w : changed_) {
    st_.record(w).core_status.store(pack_core(k_ - 1, Propagation::kIdle),
                                    std::memory_order_relaxed);
  }
  auto& from = st_.list(k_);
  std::vector<om::Entry*> run;
  run.reserve(changed_.size());
  for (Vertex w : changed_) {
    auto& rec = st_.record(w);
    st_.release_predecessors(w, k_);
    rec.epoch.fetch_add(1, std::memory_order_relaxed);
    from.erase(rec.entry);
    rec.mcd.store(kUnknownMcd, std::memory_order_relaxed);
    run.push_back(&rec.entry);
  }
  // demotion order is a valid peel: each vertex left with fewer than k
  // neighbors among those demoted after it and those that stay at k or above
  st_.list(k_ - 1).insert_tail_run(run);
  for (Vertex w : changed_) {
    auto& rec = st_.record(w);
    rec.epoch.fetch_add(1, std::memory_order_relaxed);
    rec.deg_out.store(st_.count_successors(w), std::memory_order_relaxed);
  }
}

}  // namespace kcore
