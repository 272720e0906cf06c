#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "fedspectral/graph.hpp"
#include "fedspectral/random.hpp"

namespace fedspectral {

/// One client's private edge subset. The graph spans the full node universe, so nodes with
/// no local edges are present but isolated.
struct ClientShard {
  std::size_t client_id = 0;
  Graph graph;

  std::size_t num_nodes() const noexcept { return graph.num_nodes(); }
};

/// How edges are spread: every edge goes to exactly `replication` of `num_clients` clients.
struct PartitionPlan {
  std::size_t num_clients = 1;
  std::size_t replication = 1;
  Seed seed = 0;
};

/// r = max(1, round(overlap · C)).
inline std::size_t replication_for(double overlap, std::size_t num_clients) {
  if (num_clients == 0) throw ConfigError("num_clients must be at least 1");
  if (!(overlap > 0.0) || overlap > 1.0)
    throw ConfigError("overlap must lie in (0, 1], got " + std::to_string(overlap));
  const auto r = static_cast<std::size_t>(std::llround(overlap * static_cast<double>(num_clients)));
  return std::clamp<std::size_t>(r, 1, num_clients);
}

inline PartitionPlan make_partition_plan(std::size_t num_clients, double overlap, Seed seed,
                                         std::optional<std::size_t> replication_override = std::nullopt) {
  PartitionPlan plan{num_clients, replication_for(overlap, num_clients), seed};
  if (replication_override) {
    if (*replication_override < 1 || *replication_override > num_clients)
      throw ConfigError("replication must lie in [1, num_clients]");
    plan.replication = *replication_override;
  }
  return plan;
}

/// Assigns each edge to `plan.replication` distinct clients drawn uniformly without
/// replacement (partial Fisher-Yates per edge, one generator seeded by `plan.seed`).
inline std::vector<ClientShard> distribute_edges(const Graph& g, const PartitionPlan& plan) {
  if (plan.num_clients == 0) throw ConfigError("num_clients must be at least 1");
  if (plan.replication < 1 || plan.replication > plan.num_clients)
    throw ConfigError("replication must lie in [1, num_clients]");

  std::vector<std::vector<Edge>> buckets(plan.num_clients);
  for (auto& b : buckets) b.reserve(g.num_edges() * plan.replication / plan.num_clients + 1);
  Rng rng(plan.seed);
  std::vector<std::size_t> slots(plan.num_clients);
  for (const Edge& e : g.edges()) {
    std::iota(slots.begin(), slots.end(), 0);
    for (std::size_t i = 0; i < plan.replication; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, plan.num_clients - 1);
      std::swap(slots[i], slots[pick(rng)]);
      buckets[slots[i]].push_back(e);
    }
  }

  std::vector<ClientShard> shards;
  shards.reserve(plan.num_clients);
  for (std::size_t c = 0; c < plan.num_clients; ++c)
    shards.push_back(ClientShard{c, Graph(g.num_nodes(), std::move(buckets[c]))});
  return shards;
}

inline std::vector<ClientShard> distribute_edges(const Graph& g, std::size_t num_clients, double overlap, Seed seed) {
  return distribute_edges(g, make_partition_plan(num_clients, overlap, seed));
}

/// Shard as an edge list with a header comment naming the client and plan.
inline void write_shard(std::ostream& out, const ClientShard& shard, const PartitionPlan& plan) {
  const std::string header = "client_id: " + std::to_string(shard.client_id) +
                             "\nnum_clients: " + std::to_string(plan.num_clients) +
                             "\nreplication: " + std::to_string(plan.replication) +
                             "\nseed: " + std::to_string(plan.seed) +
                             "\nnum_nodes: " + std::to_string(shard.num_nodes()) +
                             "\nnum_edges: " + std::to_string(shard.graph.num_edges());
  write_edge_list(out, shard.graph, header);
}

}  // namespace fedspectral
