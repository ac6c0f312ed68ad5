#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "kcore/bench.hpp"
#include "kcore/core_decomp.hpp"
#include "kcore/maint_seq.hpp"
#include "support.hpp"

namespace kcore {
namespace {

using testing::from_edges;
using testing::naive_cores;

void expect_verified(const MaintState& st) {
  const auto check = verify(st);
  ASSERT_TRUE(check.ok()) << check.summary();
}

Graph clique(std::size_t n, std::size_t offset, std::size_t total) {
  Graph g(total);
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v) g.add_edge(offset + u, offset + v);
  return g;
}

// Vertices of core k in g whose core moves by one after an update, found as a
// fixed point: keep only those with enough support among themselves and the
// vertices above k. `raise` selects the insertion rule (more than k support
// survives) or the removal rule (fewer than k support drops out).
std::set<Vertex> fixed_point_changes(const Graph& g, const std::vector<std::uint32_t>& old_core,
                                     std::uint32_t k, bool raise) {
  const auto n = g.num_vertices();
  std::vector<char> in(n, 0);
  for (Vertex v = 0; v < n; ++v) in[v] = old_core[v] == k;
  bool changed = true;
  std::set<Vertex> dropped;
  while (changed) {
    changed = false;
    for (Vertex v = 0; v < n; ++v) {
      if (!in[v]) continue;
      std::uint32_t support = 0;
      for (Vertex w : g.neighbors(v)) support += in[w] || old_core[w] > k;
      if (raise ? support <= k : support < k) {
        in[v] = 0;
        dropped.insert(v);
        changed = true;
      }
    }
  }
  std::set<Vertex> out;
  if (raise) {
    for (Vertex v = 0; v < n; ++v)
      if (in[v]) out.insert(v);
    return out;
  }
  return dropped;
}

TEST(SeqInsert, EarlyExitWhenOutDegreeStaysWithinCore) {
  // a single edge a-b beside a 6-clique on 2..7
  Graph g = clique(6, 2, 8);
  g.add_edge(0, 1);
  MaintState st = init_state(std::move(g));
  const Vertex u = st.record(0).deg_out.load() == 0 ? 0 : 1;
  ASSERT_EQ(st.record(u).deg_out.load(), 0);
  ASSERT_EQ(st.core(u), 1u);
  ASSERT_EQ(st.core(2), 5u);
  SeqMaintainer seq(st);
  const auto outcome = seq.insert_edge(u, 2);
  EXPECT_EQ(outcome.k, 1u);
  EXPECT_EQ(outcome.changed, 0u);
  EXPECT_EQ(outcome.searched, 0u);
  EXPECT_EQ(st.core(u), 1u);
  expect_verified(st);
}

TEST(SeqInsert, ClosingAPathMakesATriangle) {
  MaintState st = init_state(from_edges(3, {{0, 1}, {1, 2}}));
  SeqMaintainer seq(st);
  const auto outcome = seq.insert_edge(0, 2);
  EXPECT_EQ(st.cores(), (std::vector<std::uint32_t>{2, 2, 2}));
  EXPECT_EQ(outcome.k, 1u);
  EXPECT_EQ(outcome.changed, 3u);
  EXPECT_EQ(seq.last_changed().size(), 3u);
  expect_verified(st);
}

TEST(SeqInsert, ChordOfFourCycleKeepsCores) {
  MaintState st = init_state(from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}));
  SeqMaintainer seq(st);
  const auto outcome = seq.insert_edge(0, 2);
  EXPECT_EQ(st.cores(), (std::vector<std::uint32_t>{2, 2, 2, 2}));
  EXPECT_EQ(outcome.changed, 0u);
  expect_verified(st);
}

TEST(SeqInsert, RejectsLoopsAndPresentEdges) {
  MaintState st = init_state(from_edges(3, {{0, 1}}));
  SeqMaintainer seq(st);
  EXPECT_THROW(seq.insert_edge(1, 1), std::invalid_argument);
  EXPECT_THROW(seq.insert_edge(1, 0), std::invalid_argument);
  EXPECT_THROW(seq.remove_edge(1, 2), std::invalid_argument);
  expect_verified(st);
}

TEST(SeqRemove, TriangleDropsToOne) {
  MaintState st = init_state(from_edges(3, {{0, 1}, {1, 2}, {0, 2}}));
  SeqMaintainer seq(st);
  const auto outcome = seq.remove_edge(0, 1);
  EXPECT_EQ(st.cores(), (std::vector<std::uint32_t>{1, 1, 1}));
  EXPECT_EQ(outcome.k, 2u);
  EXPECT_EQ(outcome.changed, 3u);
  expect_verified(st);
}

TEST(SeqRemove, SurplusSupportMeansNoChange) {
  // dropping the chord of a four-cycle leaves both endpoints two neighbors
  MaintState st = init_state(from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}}));
  SeqMaintainer seq(st);
  const auto outcome = seq.remove_edge(0, 2);
  EXPECT_EQ(st.cores(), (std::vector<std::uint32_t>{2, 2, 2, 2}));
  EXPECT_EQ(outcome.changed, 0u);
  expect_verified(st);
}

TEST(SeqRemove, StarLeafBecomesIsolated) {
  MaintState st = init_state(from_edges(4, {{0, 1}, {0, 2}, {0, 3}}));
  SeqMaintainer seq(st);
  seq.remove_edge(0, 3);
  EXPECT_EQ(st.cores(), (std::vector<std::uint32_t>{1, 1, 1, 0}));
  expect_verified(st);
}

TEST(SeqMaintainer, RoundTripRestoresCores) {
  const Graph base = make_erdos_renyi(300, 1200, 4);
  MaintState st = init_state(base);
  const auto initial = st.cores();
  SeqMaintainer seq(st);
  const auto batch = sample_batch(base, 400, SampleMode::kUniform, 8).edges;
  for (const auto& e : batch) seq.remove_edge(e.u, e.v);
  expect_verified(st);
  for (const auto& e : batch) seq.insert_edge(e.u, e.v);
  expect_verified(st);
  EXPECT_EQ(st.cores(), initial);
}

TEST(SeqMaintainer, RandomOperationsMatchOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + rng() % 181;
    Graph g = testing::random_graph(n, 4.0 / static_cast<double>(n), rng);
    MaintState st = init_state(std::move(g));
    SeqMaintainer seq(st);
    for (int op = 0; op < 150; ++op) {
      const auto& cur = st.graph();
      const bool insert = cur.num_edges() == 0 || rng() % 2 == 0;
      const auto before = st.cores();
      if (insert) {
        const auto e = testing::random_absent_edge(cur, rng);
        seq.insert_edge(e.u, e.v);
      } else {
        const auto e = testing::random_present_edge(cur, rng);
        seq.remove_edge(e.u, e.v);
      }
      const auto after = st.cores();
      ASSERT_EQ(after, naive_cores(st.graph())) << "trial " << trial << " op " << op;
      for (Vertex v = 0; v < n; ++v) {
        const auto delta = static_cast<int>(after[v]) - static_cast<int>(before[v]);
        ASSERT_LE(std::abs(delta), 1);
        ASSERT_TRUE(delta == 0 || (insert ? delta == 1 : delta == -1));
      }
      const auto check = verify(st);
      ASSERT_TRUE(check.ok()) << check.summary();
    }
  }
}

TEST(SeqMaintainer, ChangedSetIsTheSupportFixedPoint) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 3 + rng() % 8;
    Graph g = testing::random_graph(n, 0.45, rng);
    MaintState st = init_state(std::move(g));
    SeqMaintainer seq(st);
    for (int op = 0; op < 10; ++op) {
      const auto& cur = st.graph();
      const bool complete = cur.num_edges() == n * (n - 1) / 2;
      const bool insert = !complete && (cur.num_edges() == 0 || rng() % 2 == 0);
      const auto before = st.cores();
      Edge e{};
      if (insert) {
        e = testing::random_absent_edge(cur, rng);
        seq.insert_edge(e.u, e.v);
      } else {
        e = testing::random_present_edge(cur, rng);
        seq.remove_edge(e.u, e.v);
      }
      const auto k = std::min(before[e.u], before[e.v]);
      const auto expected = fixed_point_changes(st.graph(), before, k, insert);
      const std::set<Vertex> got(seq.last_changed().begin(), seq.last_changed().end());
      ASSERT_EQ(got, expected) << "trial " << trial << " op " << op;
      std::set<Vertex> diff;
      const auto truth = naive_cores(st.graph());
      for (Vertex v = 0; v < n; ++v)
        if (truth[v] != before[v]) diff.insert(v);
      ASSERT_EQ(got, diff);
    }
  }
}

}  // namespace
}  // namespace kcore
