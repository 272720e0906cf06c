#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "test_support.hpp"

using namespace fedspectral;
using namespace fedspectral::testing;

namespace {

std::map<std::pair<NodeId, NodeId>, std::size_t> copies_per_edge(const std::vector<ClientShard>& shards) {
  std::map<std::pair<NodeId, NodeId>, std::size_t> count;
  for (const ClientShard& s : shards)
    for (const Edge& e : s.graph.edges()) ++count[{e.u, e.v}];
  return count;
}

}  // namespace

TEST(Replication, RoundsOverlapTimesClients) {
  EXPECT_EQ(replication_for(0.4, 5), 2u);
  EXPECT_EQ(replication_for(1.0, 5), 5u);
  EXPECT_EQ(replication_for(0.01, 5), 1u);
  EXPECT_EQ(replication_for(0.5, 1), 1u);
  EXPECT_EQ(replication_for(0.3, 10), 3u);
}

TEST(Replication, InvalidOverlapIsConfigError) {
  EXPECT_THROW(replication_for(0.0, 5), ConfigError);
  EXPECT_THROW(replication_for(-0.1, 5), ConfigError);
  EXPECT_THROW(replication_for(1.5, 5), ConfigError);
  EXPECT_THROW(replication_for(0.4, 0), ConfigError);
  EXPECT_THROW(make_partition_plan(5, 0.4, 1, 6), ConfigError);
  EXPECT_THROW(make_partition_plan(5, 0.4, 1, 0), ConfigError);
  EXPECT_EQ(make_partition_plan(5, 0.4, 1, 4).replication, 4u);
}

TEST(DistributeEdges, SingleClientGetsEverything) {
  const Graph g = erdos_renyi(40, 0.1, 2);
  const auto shards = distribute_edges(g, 1, 0.4, 7);
  ASSERT_EQ(shards.size(), 1u);
  EXPECT_EQ(shards[0].graph, g);
}

TEST(DistributeEdges, FullOverlapCopiesToAll) {
  const Graph g = erdos_renyi(30, 0.2, 3);
  for (const ClientShard& s : distribute_edges(g, 4, 1.0, 9)) EXPECT_EQ(s.graph, g);
}

TEST(DistributeEdges, ExactReplicationConservationDeterminism) {
  for (Seed s = 0; s < 50; ++s) {
    const std::size_t n = 10 + (s * 17) % 120;
    const Graph g = erdos_renyi(n, 0.1, 300 + s);
    const std::size_t c = 1 + s % 7;
    const double overlap = 0.1 + 0.15 * static_cast<double>(s % 7);
    const PartitionPlan plan = make_partition_plan(c, overlap, derive_seed(s, "p"));
    const auto shards = distribute_edges(g, plan);
    ASSERT_EQ(shards.size(), c);
    const auto count = copies_per_edge(shards);
    EXPECT_EQ(count.size(), g.num_edges());
    for (const Edge& e : g.edges()) EXPECT_EQ(count.at({e.u, e.v}), plan.replication);
    for (std::size_t i = 0; i < c; ++i) {
      EXPECT_EQ(shards[i].client_id, i);
      EXPECT_EQ(shards[i].num_nodes(), n);
    }
    const auto again = distribute_edges(g, plan);
    for (std::size_t i = 0; i < c; ++i) EXPECT_EQ(shards[i].graph, again[i].graph);
  }
}

TEST(DistributeEdges, ClientLoadIsRoughlyUniform) {
  const Graph g = erdos_renyi(400, 0.05, 11);
  const std::size_t c = 5;
  const auto shards = distribute_edges(g, c, 0.4, 5);
  // each client holds each edge with probability r/C = 0.4
  const double m = static_cast<double>(g.num_edges());
  const double mean = 0.4 * m;
  const double sd = std::sqrt(m * 0.4 * 0.6);
  for (const ClientShard& s : shards) EXPECT_NEAR(static_cast<double>(s.graph.num_edges()), mean, 3 * sd);
}

TEST(DistributeEdges, DifferentSeedsDiffer) {
  const Graph g = erdos_renyi(60, 0.1, 12);
  const auto a = distribute_edges(g, 5, 0.4, 1);
  const auto b = distribute_edges(g, 5, 0.4, 2);
  bool any = false;
  for (std::size_t i = 0; i < 5; ++i) any |= !(a[i].graph == b[i].graph);
  EXPECT_TRUE(any);
}

TEST(WriteShard, HeaderAndRoundTrip) {
  const Graph g(5, {{0, 1}, {1, 2}});
  const PartitionPlan plan{3, 1, 42};
  std::ostringstream out;
  write_shard(out, ClientShard{2, g}, plan);
  const std::string text = out.str();
  EXPECT_NE(text.find("# client_id: 2"), std::string::npos);
  EXPECT_NE(text.find("# replication: 1"), std::string::npos);
  EXPECT_EQ(parse_edge_list(text, false).graph, g);
}

TEST(ClusterSimilarity, IdentityIsOne) {
  const Labeling l = random_labeling(50, 4, 1);
  EXPECT_EQ(cluster_similarity(l, l), 1.0);
}

TEST(ClusterSimilarity, FourNodeAsymmetry) {
  const Labeling all_same{0, 0, 0, 0};
  const Labeling pairs{0, 0, 1, 1};
  // 8 of 16 ordered pairs are co-labeled in the reference but split in the aggregate
  EXPECT_EQ(cluster_similarity(all_same, pairs), 0.5);
  EXPECT_EQ(cluster_similarity(pairs, all_same), 1.0);
  const Labeling singles{0, 1, 2, 3};
  EXPECT_EQ(cluster_similarity(all_same, singles), 0.25);
  EXPECT_EQ(cluster_similarity(singles, all_same), 1.0);
}

TEST(ClusterSimilarity, RelabelingInvariance) {
  const Labeling g = random_labeling(80, 5, 3);
  const Labeling a = random_labeling(80, 4, 4);
  Labeling a_renamed = a;
  for (int& x : a_renamed) x = 100 - 7 * x;
  Labeling g_renamed = g;
  for (int& x : g_renamed) x = (x + 3) % 5;
  EXPECT_EQ(cluster_similarity(g, a), cluster_similarity(g_renamed, a_renamed));
}

TEST(ClusterSimilarity, MatchesPairOracle) {
  for (Seed s = 0; s < 100; ++s) {
    const std::size_t n = 1 + (s * 37) % 300;
    const Labeling g = random_labeling(n, 1 + static_cast<int>(s % 9), 2 * s);
    const Labeling a = random_labeling(n, 1 + static_cast<int>((s * 5) % 11), 2 * s + 1);
    EXPECT_DOUBLE_EQ(cluster_similarity(g, a), similarity_oracle(g, a)) << "n=" << n;
  }
}

TEST(ClusterSimilarity, Errors) {
  EXPECT_THROW(cluster_similarity({0, 1}, {0}), ContractError);
  EXPECT_THROW(cluster_similarity({}, {}), ContractError);
}
