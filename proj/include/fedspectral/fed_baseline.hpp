#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fedspectral/kmeans.hpp"
#include "fedspectral/laplacian.hpp"
#include "fedspectral/partition.hpp"
#include "fedspectral/spectral.hpp"

namespace fedspectral {

/// Client side of the label-fusion protocol: plain spectral clustering of the local shard.
/// `degenerate` is set when the shard holds no edges (all-zero Laplacian).
inline Labeling get_client_labels(const ClientShard& shard, std::size_t num_clusters, Seed seed,
                                  const SpectralOptions& opts = {}, bool* degenerate = nullptr) {
  if (num_clusters == 0 || num_clusters > shard.num_nodes())
    throw ContractError("get_client_labels: need 1 <= num_clusters <= N");
  if (degenerate) *degenerate = shard.graph.num_edges() == 0;
  return global_spectral_clustering(shard.graph, num_clusters, seed, opts);
}

/// Dense co-membership graph: entry (i, j) is the fraction of clients that gave i and j the
/// same label. Diagonal is 1.
class SimilarityGraph {
 public:
  explicit SimilarityGraph(Matrix weights) : weights_(std::move(weights)) {}

  std::size_t size() const noexcept { return weights_.rows(); }
  const Matrix& weights() const noexcept { return weights_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return weights_(i, j); }

  /// Copy with a zero diagonal, ready to be read as a weighted graph.
  Matrix without_self_loops() const {
    Matrix w = weights_;
    for (std::size_t i = 0; i < w.rows(); ++i) w(i, i) = 0.0;
    return w;
  }

 private:
  Matrix weights_;
};

inline SimilarityGraph build_similarity_graph(std::span<const Labeling> labelings, std::size_t num_clients) {
  if (labelings.size() != num_clients)
    throw ContractError("build_similarity_graph: got " + std::to_string(labelings.size()) + " labelings for " +
                        std::to_string(num_clients) + " clients");
  if (labelings.empty()) throw ContractError("build_similarity_graph: no labelings");
  const std::size_t n = labelings.front().size();
  Matrix counts(n, n);
  for (const Labeling& labels : labelings) {
    if (labels.size() != n) throw ContractError("build_similarity_graph: labelings have different lengths");
    // bucket members per label, then every pair inside a bucket agrees
    std::unordered_map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) members[labels[i]].push_back(i);
    for (const auto& [label, nodes] : members)
      for (std::size_t a : nodes) {
        auto row = counts.row(a);
        for (std::size_t b : nodes) row[b] += 1.0;
      }
  }
  const double inv = 1.0 / static_cast<double>(num_clients);
  for (double& x : counts.data()) x *= inv;
  return SimilarityGraph(std::move(counts));
}

/// Seed for client `client_id` under a master seed.
inline Seed client_seed(Seed master, std::size_t client_id) { return derive_seed(master, client_id); }

struct BaselineResult {
  Labeling labels;
  std::vector<Labeling> client_labels;          ///< indexed by client id
  std::vector<std::size_t> degenerate_clients;  ///< ids of clients whose shard had no edges
};

/// Server side: collect every client's labeling, fuse them into the co-membership graph,
/// drop its diagonal and spectrally cluster it.
inline BaselineResult fedspectral_server(std::span<const ClientShard> shards, std::size_t num_clusters, Seed seed,
                                         const SpectralOptions& opts = {}) {
  if (shards.empty()) throw ContractError("fedspectral_server: no clients");
  const std::size_t n = shards.front().num_nodes();
  BaselineResult out;
  out.client_labels.resize(shards.size());
  for (std::size_t c = 0; c < shards.size(); ++c) {
    if (shards[c].num_nodes() != n) throw ContractError("fedspectral_server: shards disagree on node universe");
    bool degenerate = false;
    out.client_labels[c] =
        get_client_labels(shards[c], num_clusters, client_seed(seed, shards[c].client_id), opts, &degenerate);
    if (degenerate) out.degenerate_clients.push_back(shards[c].client_id);
  }
  const SimilarityGraph similarity = build_similarity_graph(out.client_labels, shards.size());
  const LaplacianMatrix l = normalized_laplacian(similarity.without_self_loops());
  const Seed server = derive_seed(seed, "server");
  out.labels = cluster_embedding(spectral_embedding(l, num_clusters, eigen_seed(server), opts), num_clusters,
                                 kmeans_seed(server), opts);
  return out;
}

}  // namespace fedspectral
