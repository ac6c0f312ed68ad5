#include "kcore/maint_par.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "kcore/spin.hpp"

namespace kcore {

namespace {

template <typename Pred>
bool cond_lock_impl(MaintState& st, Vertex x, std::int32_t worker, Pred&& holds) {
  auto& owner = st.record(x).owner;
  assert(owner.load(std::memory_order_relaxed) != worker && "vertex lock is not re-entrant");
  Backoff backoff;
  for (;;) {
    if (!holds()) return false;
    std::int32_t expected = kUnlocked;
    if (owner.load(std::memory_order_relaxed) == kUnlocked &&
        owner.compare_exchange_weak(expected, worker, std::memory_order_acquire)) {
      if (holds()) return true;
      owner.store(kUnlocked, std::memory_order_release);
      return false;
    }
    backoff.pause();
  }
}

bool epoch_odd(std::uint32_t s) { return (s & 1) != 0; }

}  // namespace

bool cond_lock(MaintState& st, Vertex x, std::int32_t worker,
               const std::function<bool()>& holds) {
  return cond_lock_impl(st, x, worker, holds);
}

bool lock_if_core(MaintState& st, Vertex x, std::int32_t worker, std::uint32_t k) {
  return cond_lock_impl(st, x, worker, [&] { return st.core(x) == k; });
}

void lock_vertex(MaintState& st, Vertex x, std::int32_t worker) {
  cond_lock_impl(st, x, worker, [] { return true; });
}

bool try_lock_vertex(MaintState& st, Vertex x, std::int32_t worker) {
  auto& owner = st.record(x).owner;
  std::int32_t expected = kUnlocked;
  return owner.load(std::memory_order_relaxed) == kUnlocked &&
         owner.compare_exchange_strong(expected, worker, std::memory_order_acquire);
}

void unlock_vertex(MaintState& st, Vertex x, std::int32_t worker) {
  auto& owner = st.record(x).owner;
  assert(owner.load(std::memory_order_relaxed) == worker && "unlock by a non-owner");
  (void)worker;
  owner.store(kUnlocked, std::memory_order_release);
}

void lock_pair(MaintState& st, Vertex u, Vertex v, std::int32_t worker) {
  assert(u != v);
  const Vertex lo = std::min(u, v);
  const Vertex hi = std::max(u, v);
  Backoff backoff;
  for (;;) {
    lock_vertex(st, lo, worker);
    if (try_lock_vertex(st, hi, worker)) return;
    unlock_vertex(st, lo, worker);
    backoff.pause();
  }
}

bool parallel_order(MaintState& st, Vertex u, Vertex v) {
  if (u == v) return false;
  const auto& ru = st.record(u);
  const auto& rv = st.record(v);
  Backoff backoff;
  for (;;) {
    const auto su = ru.epoch.load(std::memory_order_acquire);
    const auto sv = rv.epoch.load(std::memory_order_acquire);
    if (!epoch_odd(su) && !epoch_odd(sv)) {
      const auto cu = st.core(u);
      const auto cv = st.core(v);
      const bool result = cu != cv ? cu < cv : st.list(cu).precedes_stable(ru.entry, rv.entry);
      std::atomic_thread_fence(std::memory_order_acquire);
      if (ru.epoch.load(std::memory_order_relaxed) == su &&
          rv.epoch.load(std::memory_order_relaxed) == sv) {
        return result;
      }
    }
    backoff.pause();
  }
}

// ---------------------------------------------------------------------------

void VersionedQueue::clear() noexcept {
  heap_.clear();
  version_.reset();
}

bool VersionedQueue::later(const Item& a, const Item& b) noexcept {
  if (a.top != b.top) return a.top > b.top;
  return a.bottom > b.bottom;
}

VersionedQueue::Item VersionedQueue::snapshot(const MaintState& st, Vertex v,
                                              std::uint32_t epoch, std::uint64_t version) {
  const auto& entry = st.record(v).entry;
  const om::Group* g = entry.group.load(std::memory_order_acquire);
  Item item;
  item.v = v;
  item.top = g ? g->label.load(std::memory_order_relaxed) : ~std::uint64_t{0};
  item.bottom = entry.label.load(std::memory_order_relaxed);
  item.epoch = epoch;
  item.version = version;
  return item;
}

void VersionedQueue::enqueue(MaintState& st, const om::OrderList& order, Vertex v) {
  const auto version = order.version();
  const auto& epoch = st.record(v).epoch;
  const auto s = epoch.load(std::memory_order_acquire);
  heap_.push_back(snapshot(st, v, s, version));
  std::push_heap(heap_.begin(), heap_.end(), later);
  std::atomic_thread_fence(std::memory_order_acquire);
  if ((version & 1) != 0 || version != order.version() || order.relabels_in_flight() != 0 ||
      !version_ || *version_ != version || epoch_odd(s) ||
      s != epoch.load(std::memory_order_relaxed)) {
    version_.reset();
  }
}

void VersionedQueue::update_version(MaintState& st, const om::OrderList& order) {
  ++refreshes_;
  Backoff backoff;
  for (;;) {
    const auto version = order.version();
    if ((version & 1) != 0 || order.relabels_in_flight() != 0) {
      backoff.pause();
      continue;
    }
    for (auto& item : heap_) {
      const auto& epoch = st.record(item.v).epoch;
      Backoff member_backoff;
      for (;;) {
        const auto s = epoch.load(std::memory_order_acquire);
        if (!epoch_odd(s)) {
          item = snapshot(st, item.v, s, version);
          std::atomic_thread_fence(std::memory_order_acquire);
          if (epoch.load(std::memory_order_relaxed) == s) break;
        }
        member_backoff.pause();
      }
    }
    std::atomic_thread_fence(std::memory_order_acquire);
    if (order.relabels_in_flight() != 0 || order.version() != version) {
      backoff.pause();
      continue;
    }
    version_ = version;
    std::make_heap(heap_.begin(), heap_.end(), later);
    return;
  }
}

std::optional<Vertex> VersionedQueue::dequeue(MaintState& st, const om::OrderList& order,
                                              std::uint32_t k, std::int32_t worker) {
  auto drop_front = [this] {
    std::pop_heap(heap_.begin(), heap_.end(), later);
    heap_.pop_back();
  };
  while (!heap_.empty()) {
    if (!version_ || *version_ != order.version()) update_version(st, order);
    const Item front = heap_.front();
    auto& rec = st.record(front.v);
    if (rec.owner.load(std::memory_order_relaxed) == worker ||
        !lock_if_core(st, front.v, worker, k)) {
      drop_front();
      continue;
    }
    if (rec.epoch.load(std::memory_order_acquire) != front.epoch) {
      unlock_vertex(st, front.v, worker);
      version_.reset();
      continue;
    }
    drop_front();
    return front.v;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

void SizeHistogram::merge(const SizeHistogram& other) noexcept {
  for (std::size_t i = 0; i < buckets.size(); ++i) buckets[i] += other.buckets[i];
}

std::uint64_t SizeHistogram::total() const noexcept {
  std::uint64_t sum = 0;
  for (auto b : buckets) sum += b;
  return sum;
}

double SizeHistogram::fraction_small() const noexcept {
  const auto all = total();
  if (all == 0) return 1.0;
  return static_cast<double>(all - buckets[11]) / static_cast<double>(all);
}

// ---------------------------------------------------------------------------

WorkerContext::WorkerContext(std::size_t num_vertices, std::int32_t id)
    : id_(id),
      in_star_(num_vertices, 0),
      in_plus_(num_vertices, 0),
      in_queue_(num_vertices, 0),
      in_repair_(num_vertices, 0),
      in_visited_(num_vertices, 0),
      held_flag_(num_vertices, 0) {}

void WorkerContext::reset() {
  for (Vertex x : star_) in_star_[x] = 0;
  for (Vertex x : held_) in_plus_[x] = 0;
  for (Vertex x : enqueued_) in_queue_[x] = 0;
  for (Vertex x : repair_) in_repair_[x] = 0;
  for (Vertex x : visited_) in_visited_[x] = 0;
  star_.clear();
  held_.clear();
  enqueued_.clear();
  repair_.clear();
  repair_head_ = 0;
  visited_.clear();
  queue_.clear();
}

void WorkerContext::hold(Vertex v) {
  held_flag_[v] = 1;
  held_.push_back(v);
}

void WorkerContext::release(MaintState& st, Vertex v) {
  held_flag_[v] = 0;
  unlock_vertex(st, v, id_);
}

void WorkerContext::release_all(MaintState& st) {
  for (Vertex v : held_) {
    if (held_flag_[v]) release(st, v);
  }
}

UpdateOutcome WorkerContext::insert_edge(MaintState& st, Vertex a, Vertex b) {
  reset();
  lock_pair(st, a, b, id_);
  // both endpoints are held, so their relative order cannot change under us
  if (!parallel_order(st, a, b)) std::swap(a, b);
  const Vertex u = a;
  const Vertex v = b;
  k_ = st.core(u);
  const auto k = static_cast<std::int32_t>(k_);

  if (!st.graph().add_edge(u, v)) {
    unlock_vertex(st, v, id_);
    unlock_vertex(st, u, id_);
    throw std::logic_error("parallel insertion of a present edge");
  }
  auto& ru = st.record(u);
  ru.deg_out.fetch_add(1, std::memory_order_relaxed);
  st.bump_known_mcd(u);
  if (st.core(v) == k_) st.bump_known_mcd(v);
  unlock_vertex(st, v, id_);
  if (ru.deg_out.load(std::memory_order_relaxed) <= k) {
    unlock_vertex(st, u, id_);
    histogram.add(0);
    return {k_, 0, 0};
  }

  auto& order = st.list(k_);
  std::size_t searched = 0;
  hold(u);
  std::optional<Vertex> next = u;
  while (next) {
    const Vertex w = *next;
    in_queue_[w] = 0;
    auto& rw = st.record(w);
    rw.deg_in = 0;
    for (Vertex x : st.graph().neighbors(w)) {
      if (in_star_[x] && order.precedes_stable(st.record(x).entry, rw.entry)) ++rw.deg_in;
    }
    const auto out = rw.deg_out.load(std::memory_order_relaxed);
    if (rw.deg_in + out > k) {
      forward(st, w);
      ++searched;
    } else if (rw.deg_in > 0) {
      backward(st, w);
      ++searched;
    } else {
      release(st, w);
    }
    next = queue_.dequeue(st, order, k_, id_);
    if (next) hold(*next);
  }

  std::vector<Vertex> promoted;
  for (Vertex w : star_) {
    if (in_star_[w]) promoted.push_back(w);
  }
  if (!promoted.empty()) {
    for (Vertex w : promoted) st.record(w).epoch.fetch_add(1, std::memory_order_acq_rel);
    std::vector<om::Entry*> run;
    run.reserve(promoted.size());
    for (Vertex w : promoted) {
      auto& rec = st.record(w);
      rec.deg_in = 0;
      order.erase(rec.entry);
      run.push_back(&rec.entry);
    }
    st.list(k_ + 1).insert_head_run(run);
    // A worker waiting on w gives up once it sees the new core and may then
    // put its own run at the head, so the core changes only after w is placed.
    for (Vertex w : promoted) {
      auto& rec = st.record(w);
      rec.core_status.store(pack_core(k_ + 1, Propagation::kIdle), std::memory_order_release);
      rec.mcd.store(kUnknownMcd, std::memory_order_release);
      rec.epoch.fetch_add(1, std::memory_order_acq_rel);
    }
    for (Vertex w : promoted) {
      for (Vertex x : st.graph().neighbors(w)) {
        if (!in_star_[x] && st.core(x) == k_ + 1) st.bump_known_mcd(x);
      }
    }
  }
  release_all(st);
  histogram.add(searched);
  return {k_, searched, promoted.size()};
}

void WorkerContext::forward(MaintState& st, Vertex u) {
  in_star_[u] = 1;
  in_plus_[u] = 1;
  star_.push_back(u);
  auto& order = st.list(k_);
  for (Vertex x : st.graph().neighbors(u)) {
    if (held_flag_[x] || in_queue_[x] || st.core(x) != k_) continue;
    if (!parallel_order(st, u, x)) continue;
    in_queue_[x] = 1;
    enqueued_.push_back(x);
    queue_.enqueue(st, order, x);
  }
}

void WorkerContext::backward(MaintState& st, Vertex w) {
  in_plus_[w] = 1;
  auto& order = st.list(k_);
  auto absorb = [&st](Vertex x) {
    auto& rec = st.record(x);
    rec.deg_out.fetch_add(rec.deg_in, std::memory_order_relaxed);
    rec.deg_in = 0;
  };
  Vertex pre = w;
  do_pre(st, w);
  absorb(w);
  while (repair_head_ < repair_.size()) {
    const Vertex x = repair_[repair_head_++];
    in_star_[x] = 0;
    do_pre(st, x);
    do_post(st, x);
    auto& rec = st.record(x);
    rec.epoch.fetch_add(1, std::memory_order_acq_rel);
    order.erase(rec.entry);
    order.insert_after(st.record(pre).entry, rec.entry);
    rec.epoch.fetch_add(1, std::memory_order_acq_rel);
    pre = x;
    absorb(x);
  }
}

void WorkerContext::do_pre(MaintState& st, Vertex u) {
  const auto k = static_cast<std::int32_t>(k_);
  auto& order = st.list(k_);
  const auto& eu = st.record(u).entry;
  for (Vertex x : st.graph().neighbors(u)) {
    if (!in_star_[x]) continue;
    auto& rx = st.record(x);
    if (!order.precedes_stable(rx.entry, eu)) continue;
    const auto out = rx.deg_out.fetch_sub(1, std::memory_order_relaxed) - 1;
    if (rx.deg_in + out <= k && !in_repair_[x]) {
      in_repair_[x] = 1;
      repair_.push_back(x);
    }
  }
}

void WorkerContext::do_post(MaintState& st, Vertex u) {
  const auto k = static_cast<std::int32_t>(k_);
  auto& order = st.list(k_);
  const auto& eu = st.record(u).entry;
  for (Vertex x : st.graph().neighbors(u)) {
    if (!in_star_[x]) continue;
    auto& rx = st.record(x);
    if (rx.deg_in <= 0 || !order.precedes_stable(eu, rx.entry)) continue;
    rx.deg_in -= 1;
    if (rx.deg_in + rx.deg_out.load(std::memory_order_relaxed) <= k && !in_repair_[x]) {
      in_repair_[x] = 1;
      repair_.push_back(x);
    }
  }
}

UpdateOutcome WorkerContext::remove_edge(MaintState& st, Vertex a, Vertex b) {
  reset();
  lock_pair(st, a, b, id_);
  const auto ca = st.core(a);
  const auto cb = st.core(b);
  k_ = std::min(ca, cb);
  st.check_mcd(a);
  st.check_mcd(b);
  const Vertex earlier = parallel_order(st, a, b) ? a : b;
  if (!st.graph().remove_edge(a, b)) {
    unlock_vertex(st, a, id_);
    unlock_vertex(st, b, id_);
    throw std::logic_error("parallel removal of an absent edge");
  }
  st.record(earlier).deg_out.fetch_sub(1, std::memory_order_relaxed);

  // only an endpoint whose neighbor is at least as high loses a max-core neighbor
  if (ca == cb) {
    do_mcd(st, a);
    do_mcd(st, b);
  } else if (ca < cb) {
    do_mcd(st, a);
    unlock_vertex(st, b, id_);
  } else {
    do_mcd(st, b);
    unlock_vertex(st, a, id_);
  }

  while (repair_head_ < repair_.size()) {
    const Vertex w = repair_[repair_head_++];
    auto& status = st.record(w).core_status;
    for (Vertex x : visited_) in_visited_[x] = 0;
    visited_.clear();
    for (;;) {
      status.fetch_sub(1, std::memory_order_acq_rel);
      for (Vertex x : st.graph().neighbors(w)) {
        if (in_visited_[x] || held_flag_[x] || st.core(x) != k_) continue;
        if (!lock_if_core(st, x, id_, k_)) continue;
        st.check_mcd(x, w);
        in_visited_[x] = 1;
        visited_.push_back(x);
        do_mcd(st, x);
      }
      const auto word = status.fetch_sub(1, std::memory_order_acq_rel) - 1;
      if (unpack_status(word) == Propagation::kIdle) break;
    }
  }

  if (!star_.empty()) {
    std::vector<om::Entry*> run;
    run.reserve(star_.size());
    for (Vertex w : star_) run.push_back(&st.record(w).entry);
    st.list(k_ - 1).insert_tail_run(run);
    demoted_.insert(demoted_.end(), star_.begin(), star_.end());
  }
  release_all(st);
  histogram.add(star_.size());
  return {k_, star_.size(), star_.size()};
}

void WorkerContext::do_mcd(MaintState& st, Vertex u) {
  auto& rec = st.record(u);
  const auto left = rec.mcd.fetch_sub(1, std::memory_order_acq_rel) - 1;
  if (left >= static_cast<std::int32_t>(k_)) {
    unlock_vertex(st, u, id_);
    return;
  }
  st.release_predecessors(u, k_);
  rec.core_status.store(pack_core(k_ - 1, Propagation::kReady), std::memory_order_release);
  rec.mcd.store(kUnknownMcd, std::memory_order_release);
  in_star_[u] = 1;
  star_.push_back(u);
  repair_.push_back(u);
  hold(u);
  st.list(k_).erase(rec.entry);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<EdgeStatus> validate(const MaintState& st, std::span<const Edge> edges,
                                 BatchKind kind) {
  const auto n = st.num_vertices();
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges.size() * 2);
  std::vector<EdgeStatus> status(edges.size(), EdgeStatus::kApplied);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [u, v] = edges[i];
    if (u >= n || v >= n) throw std::out_of_range("batch edge endpoint out of range");
    if (u == v) throw std::invalid_argument("batch contains a self-loop");
    const auto key = (std::uint64_t{std::min(u, v)} << 32) | std::max(u, v);
    if (!seen.insert(key).second) throw std::invalid_argument("batch repeats an edge");
    const bool present = st.graph().has_edge(u, v);
    if (present == (kind == BatchKind::kInsert)) status[i] = EdgeStatus::kSkipped;
  }
  return status;
}

template <typename Fn>
void run_chunks(std::size_t count, const BatchOptions& options, Fn&& work) {
  const std::size_t workers = std::max<std::size_t>(1, options.workers);
  struct Chunk {
    std::atomic<std::size_t> next{0};
    std::size_t end = 0;
  };
  std::vector<Chunk> chunks(workers);
  for (std::size_t i = 0; i < workers; ++i) {
    chunks[i].next.store(i * count / workers, std::memory_order_relaxed);
    chunks[i].end = (i + 1) * count / workers;
  }
  auto drain = [&](std::size_t worker, Chunk& chunk) {
    for (;;) {
      const auto i = chunk.next.fetch_add(1, std::memory_order_relaxed);
      if (i >= chunk.end) return;
      work(worker, i);
    }
  };
  auto body = [&](std::size_t worker) {
    drain(worker, chunks[worker]);
    if (!options.steal) return;
    for (std::size_t j = 1; j < workers; ++j) drain(worker, chunks[(worker + j) % workers]);
  };

  if (workers == 1) {
    body(0);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        body(w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<WorkerContext> make_contexts(const MaintState& st, std::size_t workers) {
  std::vector<WorkerContext> contexts;
  contexts.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) {
    contexts.emplace_back(st.num_vertices(), static_cast<std::int32_t>(i));
  }
  return contexts;
}

// Demoted vertices of one final core c sit at the tail of list c. Workers
// append independently, so the concatenation is not always a valid peel;
// when it is not, re-peel that tail against threshold c + 1.
bool repeel_tail(MaintState& st, std::uint32_t c, std::vector<Vertex>& tail) {
  bool valid = true;
  for (Vertex d : tail) {
    if (st.count_successors(d) > static_cast<std::int32_t>(c)) {
      valid = false;
      break;
    }
  }
  if (valid) return false;

  auto& order = st.list(c);
  std::sort(tail.begin(), tail.end(), [&](Vertex x, Vertex y) {
    return om::OrderList::precedes(st.record(x).entry, st.record(y).entry);
  });
  std::unordered_set<Vertex> pending(tail.begin(), tail.end());
  std::map<Vertex, std::int32_t> remaining;
  for (Vertex d : tail) {
    std::int32_t r = 0;
    for (Vertex x : st.graph().neighbors(d)) {
      if (st.core(x) > c || pending.contains(x)) ++r;
    }
    remaining[d] = r;
  }
  std::vector<Vertex> peel;
  peel.reserve(tail.size());
  std::unordered_set<Vertex> queued;
  for (Vertex d : tail) {
    if (remaining[d] <= static_cast<std::int32_t>(c)) {
      peel.push_back(d);
      queued.insert(d);
    }
  }
  for (std::size_t head = 0; head < peel.size(); ++head) {
    const Vertex d = peel[head];
    pending.erase(d);
    for (Vertex x : st.graph().neighbors(d)) {
      if (!pending.contains(x) || queued.contains(x)) continue;
      if (--remaining[x] <= static_cast<std::int32_t>(c)) {
        peel.push_back(x);
        queued.insert(x);
      }
    }
  }
  if (peel.size() != tail.size()) throw std::logic_error("demoted vertices do not peel");

  std::vector<om::Entry*> run;
  run.reserve(peel.size());
  for (Vertex d : peel) {
    order.erase(st.record(d).entry);
    run.push_back(&st.record(d).entry);
  }
  order.insert_tail_run(run);
  return true;
}

}  // namespace

BatchResult parallel_insert_batch(MaintState& st, std::span<const Edge> edges,
                                  const BatchOptions& options) {
  BatchResult result;
  result.status = validate(st, edges, BatchKind::kInsert);
  const std::size_t workers = std::max<std::size_t>(1, options.workers);
  auto contexts = make_contexts(st, workers);
  run_chunks(edges.size(), options, [&](std::size_t w, std::size_t i) {
    if (result.status[i] != EdgeStatus::kApplied) return;
    contexts[w].insert_edge(st, edges[i].u, edges[i].v);
  });
  for (auto& ctx : contexts) {
    result.histogram.merge(ctx.histogram);
    result.queue_refreshes += ctx.queue_refreshes();
  }
  return result;
}

BatchResult parallel_remove_batch(MaintState& st, std::span<const Edge> edges,
                                  const BatchOptions& options) {
  BatchResult result;
  result.status = validate(st, edges, BatchKind::kRemove);
  const std::size_t workers = std::max<std::size_t>(1, options.workers);
  auto contexts = make_contexts(st, workers);
  run_chunks(edges.size(), options, [&](std::size_t w, std::size_t i) {
    if (result.status[i] != EdgeStatus::kApplied) return;
    contexts[w].remove_edge(st, edges[i].u, edges[i].v);
  });

  std::vector<Vertex> demoted;
  for (auto& ctx : contexts) {
    result.histogram.merge(ctx.histogram);
    auto mine = ctx.take_demoted();
    demoted.insert(demoted.end(), mine.begin(), mine.end());
  }
  std::sort(demoted.begin(), demoted.end());
  demoted.erase(std::unique(demoted.begin(), demoted.end()), demoted.end());

  std::map<std::uint32_t, std::vector<Vertex>> by_core;
  for (Vertex d : demoted) by_core[st.core(d)].push_back(d);
  for (auto& [c, tail] : by_core) {
    if (repeel_tail(st, c, tail)) ++result.order_repairs;
  }
  for (Vertex d : demoted) {
    auto& rec = st.record(d);
    rec.deg_out.store(st.count_successors(d), std::memory_order_relaxed);
  }
  return result;
}

}  // namespace kcore
