#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "kcore/core_decomp.hpp"
#include "kcore/graph.hpp"
#include "support.hpp"

namespace kcore {
namespace {

LoadedGraph load(const std::string& text, EdgeFormat format = EdgeFormat::kStatic) {
  std::istringstream in(text);
  return load_edge_list(in, format);
}

TEST(LoadEdgeList, PathGraph) {
  const auto loaded = load("0 1\n1 2");
  EXPECT_EQ(loaded.graph.num_vertices(), 3u);
  EXPECT_EQ(loaded.graph.num_edges(), 2u);
}

TEST(LoadEdgeList, DropsLoopsAndDuplicates) {
  const auto loaded = load("0 0\n0 1\n1 0");
  EXPECT_EQ(loaded.graph.num_vertices(), 2u);
  EXPECT_EQ(loaded.graph.num_edges(), 1u);
}

TEST(LoadEdgeList, EmptyInputIsEmptyGraph) {
  const auto loaded = load("");
  EXPECT_EQ(loaded.graph.num_vertices(), 0u);
  EXPECT_EQ(loaded.graph.num_edges(), 0u);
}

TEST(LoadEdgeList, CommentsAndSparseIds) {
  const auto loaded = load("# header\n% other\n\n100 7\n7 42\n");
  EXPECT_EQ(loaded.graph.num_vertices(), 3u);
  ASSERT_EQ(loaded.external_ids.size(), 3u);
  EXPECT_EQ(loaded.external_ids[0], 100u);
  EXPECT_EQ(loaded.external_ids[1], 7u);
  EXPECT_EQ(loaded.external_ids[2], 42u);
  EXPECT_TRUE(loaded.graph.has_edge(0, 1));
  EXPECT_TRUE(loaded.graph.has_edge(1, 2));

  std::ostringstream map;
  write_id_map(map, loaded);
  EXPECT_EQ(map.str(), "external_id,internal_id\n100,0\n7,1\n42,2\n");
}

TEST(LoadEdgeList, MalformedLineReportsLineNumber) {
  try {
    load("0 1\n# fine\n1 x\n");
    FAIL() << "expected a parse error";
  } catch (const GraphParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(load("0 1 2\n"), GraphParseError);
  EXPECT_THROW(load("0\n"), GraphParseError);
  EXPECT_THROW(load("0 1\n", EdgeFormat::kTemporal), GraphParseError);
  EXPECT_THROW(load("-1 2\n"), GraphParseError);
}

TEST(LoadEdgeList, TemporalKeepsTimestamps) {
  const auto loaded = load("0 1 5\n1 2 3\n1 0 9\n", EdgeFormat::kTemporal);
  EXPECT_EQ(loaded.graph.num_edges(), 2u);
  ASSERT_EQ(loaded.timeline.size(), 2u);
  for (const auto& te : loaded.timeline) {
    if (te.edge == Edge{0, 1}) {
      EXPECT_EQ(te.timestamp, 9u);
    }
  }
}

TEST(LoadEdgeList, EdgeSetMatchesDeduplicatedInput) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, 30);
  std::set<std::pair<int, int>> expected;
  std::string text;
  for (int i = 0; i < 300; ++i) {
    const int a = pick(rng);
    const int b = pick(rng);
    text += std::to_string(a) + " " + std::to_string(b) + "\n";
    if (a != b) expected.insert({std::min(a, b), std::max(a, b)});
  }
  const auto loaded = load(text);
  std::set<std::pair<int, int>> got;
  for (const auto& e : loaded.graph.edges()) {
    const auto a = static_cast<int>(loaded.external_ids[e.u]);
    const auto b = static_cast<int>(loaded.external_ids[e.v]);
    got.insert({std::min(a, b), std::max(a, b)});
  }
  EXPECT_EQ(got, expected);
  EXPECT_TRUE(loaded.graph.check_symmetric_simple());
}

TEST(GraphEdit, AddEdge) {
  Graph g(2);
  EXPECT_TRUE(g.add_edge(0, 1));
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_FALSE(g.add_edge(0, 1));
  EXPECT_FALSE(g.add_edge(1, 0));
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_FALSE(g.add_edge(0, 0));
  EXPECT_THROW(g.add_edge(0, 2), std::out_of_range);
}

TEST(GraphEdit, RemoveEdge) {
  Graph g = testing::from_edges(3, {{0, 1}, {1, 2}});
  EXPECT_FALSE(g.remove_edge(0, 2));
  EXPECT_TRUE(g.remove_edge(0, 1));
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_THROW(g.remove_edge(0, 5), std::out_of_range);
}

TEST(GraphEdit, RemoveThenReAddRoundTrips) {
  Graph g = testing::from_edges(3, {{0, 1}, {1, 2}});
  const auto before = g.edges();
  g.remove_edge(0, 1);
  g.add_edge(0, 1);
  EXPECT_EQ(g.edges(), before);
}

TEST(GraphEdit, RandomEditsKeepSymmetry) {
  std::mt19937_64 rng(11);
  Graph g(40);
  std::set<Edge> model;
  std::uniform_int_distribution<Vertex> pick(0, 39);
  for (int i = 0; i < 5000; ++i) {
    Vertex u = pick(rng);
    Vertex v = pick(rng);
    const Edge key{std::min(u, v), std::max(u, v)};
    if (rng() % 2) {
      EXPECT_EQ(g.add_edge(u, v), u != v && !model.count(key));
      if (u != v) model.insert(key);
    } else {
      EXPECT_EQ(g.remove_edge(u, v), model.erase(key) == 1);
    }
  }
  EXPECT_TRUE(g.check_symmetric_simple());
  EXPECT_EQ(g.num_edges(), model.size());
  const auto edges = g.edges();
  EXPECT_EQ(std::set<Edge>(edges.begin(), edges.end()), model);
}

TEST(SampleBatch, ZeroIsEmpty) {
  const Graph g = make_erdos_renyi(50, 100, 1);
  EXPECT_TRUE(sample_batch(g, 0, SampleMode::kUniform, 1).edges.empty());
}

TEST(SampleBatch, DeterministicForSeed) {
  const Graph g = make_erdos_renyi(50, 100, 1);
  EXPECT_EQ(sample_batch(g, 30, SampleMode::kUniform, 9).edges,
            sample_batch(g, 30, SampleMode::kUniform, 9).edges);
  EXPECT_NE(sample_batch(g, 30, SampleMode::kUniform, 9).edges,
            sample_batch(g, 30, SampleMode::kUniform, 10).edges);
}

TEST(SampleBatch, FullSampleIsPermutationOfEdges) {
  const Graph g = make_erdos_renyi(50, 100, 2);
  auto batch = sample_batch(g, g.num_edges(), SampleMode::kUniform, 3).edges;
  for (auto& e : batch) e = {std::min(e.u, e.v), std::max(e.u, e.v)};
  std::sort(batch.begin(), batch.end());
  EXPECT_EQ(batch, g.edges());
}

TEST(SampleBatch, TooManyThrows) {
  const Graph g = make_erdos_renyi(10, 5, 2);
  EXPECT_THROW(sample_batch(g, 6, SampleMode::kUniform, 1), std::invalid_argument);
}

TEST(SampleBatch, TemporalSuffixTakesLatest) {
  const auto loaded = load("0 1 10\n1 2 30\n2 3 20\n3 4 40\n", EdgeFormat::kTemporal);
  auto batch = sample_batch(loaded.graph, 2, SampleMode::kTemporalSuffix, 0, loaded.timeline);
  ASSERT_EQ(batch.edges.size(), 2u);
  std::set<std::pair<std::uint64_t, std::uint64_t>> got;
  for (const auto& e : batch.edges) {
    const auto a = loaded.external_ids[e.u];
    const auto b = loaded.external_ids[e.v];
    got.insert({std::min(a, b), std::max(a, b)});
  }
  EXPECT_EQ(got, (std::set<std::pair<std::uint64_t, std::uint64_t>>{{1, 2}, {3, 4}}));
}

TEST(Generators, SizesAndSimplicity) {
  const Graph er = make_erdos_renyi(1000, 4000, 3);
  EXPECT_EQ(er.num_vertices(), 1000u);
  EXPECT_EQ(er.num_edges(), 4000u);
  EXPECT_TRUE(er.check_symmetric_simple());

  const Graph ba = make_barabasi_albert(1000, 4, 3);
  EXPECT_EQ(ba.num_vertices(), 1000u);
  EXPECT_TRUE(ba.check_symmetric_simple());
  // every vertex after the seed clique attaches with exactly k edges
  EXPECT_EQ(ba.num_edges(), 10u + (1000u - 5u) * 4u);
}

// Full-scale synthetic graph of the published experiments: one million
// vertices and eight million edges, average degree 8 and largest core 11.
TEST(Generators, MillionVertexErdosRenyi) {
  const Graph er = make_erdos_renyi(1'000'000, 8'000'000, 1);
  std::stringstream text;
  for (const auto& e : er.edges()) text << e.u << ' ' << e.v << '\n';
  const auto loaded = load_edge_list(text, EdgeFormat::kStatic);
  const auto& g = loaded.graph;
  EXPECT_EQ(g.num_edges(), 8'000'000u);
  const double avg = static_cast<double>(g.num_edges()) / static_cast<double>(g.num_vertices());
  EXPECT_NEAR(avg, 8.00, 0.005);
  const auto cores = bz_decompose(g).core;
  EXPECT_EQ(*std::max_element(cores.begin(), cores.end()), 11u);
}

}  // namespace
}  // namespace kcore
