#include "kcore/maint_state.hpp"

#include "kcore/core_decomp.hpp"

namespace kcore {

MaintState::MaintState(Graph g)
    : graph_(std::move(g)),
      records_(graph_.num_vertices()),
      list_slots_(graph_.num_vertices() + 2),
      lists_(std::make_unique<std::atomic<om::OrderList*>[]>(list_slots_)) {
  for (std::size_t k = 0; k < list_slots_; ++k) lists_[k].store(nullptr, std::memory_order_relaxed);
}

MaintState::~MaintState() {
  if (!lists_) return;
  for (std::size_t k = 0; k < list_slots_; ++k) delete lists_[k].load(std::memory_order_relaxed);
}

std::vector<std::uint32_t> MaintState::cores() const {
  std::vector<std::uint32_t> out(num_vertices());
  for (Vertex v = 0; v < out.size(); ++v) out[v] = core(v);
  return out;
}

om::OrderList& MaintState::list(std::uint32_t k) {
  auto& slot = lists_[k];
  if (auto* existing = slot.load(std::memory_order_acquire)) return *existing;
  auto fresh = std::make_unique<om::OrderList>(k, num_vertices());
  om::OrderList* expected = nullptr;
  if (slot.compare_exchange_strong(expected, fresh.get(), std::memory_order_acq_rel)) {
    return *fresh.release();
  }
  return *expected;
}

om::OrderList* MaintState::find_list(std::uint32_t k) const noexcept {
  if (k >= list_slots_) return nullptr;
  return lists_[k].load(std::memory_order_acquire);
}

bool MaintState::precedes(Vertex u, Vertex v) const noexcept {
  const auto cu = core(u);
  const auto cv = core(v);
  if (cu != cv) return cu < cv;
  return om::OrderList::precedes(records_[u].entry, records_[v].entry);
}

bool MaintState::precedes_in_list(Vertex u, Vertex v, std::uint32_t k) {
  return list(k).precedes_stable(records_[u].entry, records_[v].entry);
}

std::int32_t MaintState::count_successors(Vertex v) const {
  std::int32_t count = 0;
  for (Vertex w : graph_.neighbors(v)) {
    if (precedes(v, w)) ++count;
  }
  return count;
}

void MaintState::check_mcd(Vertex u, Vertex source) {
  auto& rec = records_[u];
  if (rec.mcd.load(std::memory_order_acquire) != kUnknownMcd) return;
  const auto k = core(u);
  std::int32_t mcd = 0;
  for (Vertex v : graph_.neighbors(u)) {
    auto& other = records_[v].core_status;
    const auto word = other.load(std::memory_order_acquire);
    const auto cv = unpack_core(word);
    if (cv >= k) {
      ++mcd;
      continue;
    }
    if (k == 0 || cv != k - 1 || unpack_status(word) == Propagation::kIdle) continue;
    // v dropped to k-1 and has not finished telling its neighbors
    ++mcd;
    if (v != source && unpack_status(word) == Propagation::kPropagating) {
      auto expected = pack_core(cv, Propagation::kPropagating);
      other.compare_exchange_strong(expected, pack_core(cv, Propagation::kRedo),
                                    std::memory_order_acq_rel);
    }
    if (unpack_status(other.load(std::memory_order_acquire)) == Propagation::kIdle) --mcd;
  }
  rec.mcd.store(mcd, std::memory_order_release);
}

void MaintState::bump_known_mcd(Vertex v) noexcept {
  auto& mcd = records_[v].mcd;
  auto current = mcd.load(std::memory_order_acquire);
  while (current != kUnknownMcd &&
         !mcd.compare_exchange_weak(current, current + 1, std::memory_order_acq_rel)) {
  }
}

void MaintState::release_predecessors(Vertex u, std::uint32_t k) {
  auto& order = list(k);
  for (Vertex y : graph_.neighbors(u)) {
    if (core(y) != k) continue;
    if (order.precedes_stable(records_[y].entry, records_[u].entry)) {
      records_[y].deg_out.fetch_sub(1, std::memory_order_acq_rel);
    }
  }
}

MaintState init_state(Graph g) {
  MaintState st(std::move(g));
  const auto decomposition = bz_decompose(st.graph());
  const auto& order = decomposition.peel_order;
  const std::size_t n = order.size();

  std::vector<std::uint32_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[order[i]] = static_cast<std::uint32_t>(i);

  std::vector<om::Entry*> run;
  for (std::size_t i = 0; i < n;) {
    const auto k = decomposition.core[order[i]];
    run.clear();
    for (; i < n && decomposition.core[order[i]] == k; ++i) {
      run.push_back(&st.record(order[i]).entry);
    }
    st.list(k).insert_tail_run(run);
  }

  for (Vertex v = 0; v < n; ++v) {
    auto& rec = st.record(v);
    rec.core_status.store(pack_core(decomposition.core[v], Propagation::kIdle),
                          std::memory_order_relaxed);
    std::int32_t out = 0;
    for (Vertex w : st.graph().neighbors(v)) {
      if (rank[w] > rank[v]) ++out;
    }
    rec.deg_out.store(out, std::memory_order_relaxed);
  }
  return st;
}

}  // namespace kcore
