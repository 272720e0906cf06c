// Deterministic acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures (capped).

#include <cstdio>
#include <cstring>
#include <map>
#include <string>
#include <type_traits>

#include "../test_support.hpp"

using namespace fedspectral;
using namespace fedspectral::testing;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(const char* f, double x) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

void qr_round_trip() {
  double worst_rt = 0.0, worst_orth = 0.0;
  for (Seed s = 0; s < 200; ++s) {
    const std::size_t n = 2 + (s * 11) % 120;
    const std::size_t k = 1 + (s * 7) % n;
    const Matrix a = random_matrix(n, k, 7000 + s);
    const QrResult f = reduced_qr(a);
    worst_rt = std::max(worst_rt, max_abs_diff(a, f.q * f.r));
    worst_orth = std::max(worst_orth, orthonormality_error(f.q));
  }
  report("qr_round_trip", worst_rt <= 1e-8 && worst_orth <= 1e-10,
         fmt("200 matrices, max |A-QR| %.3g", worst_rt) + fmt(", max |QtQ-I| %.3g", worst_orth));
}

void eigen_residuals() {
  double worst = 0.0;
  for (Seed s = 0; s < 64; ++s) {
    const std::size_t n = 1 + s;
    const Matrix a = random_symmetric(n, 8000 + s);
    worst = std::max(worst, eigen_residual(a, symmetric_eig_reference(a)));
  }
  report("eigen_reference_residual", worst <= 1e-8, fmt("N = 1..64, max residual %.3g", worst));
}

void bottom_k_agreement() {
  double worst = 0.0;
  for (Seed s = 0; s < 12; ++s) {
    const std::size_t n = 40 + s * 13;
    const std::size_t k = 2 + s % 5;
    const Graph g = planted_partition(n, k, 0.4, 0.02, 9000 + s);
    const LaplacianMatrix l = normalized_laplacian(g);
    const Matrix ref = first_columns(symmetric_eig_reference(l.matrix()).vectors, k);
    worst = std::max(worst, principal_angle_sine(ref, bottom_k_eigenvectors(l, k, s)));
  }
  report("bottom_k_vs_reference", worst <= 1e-6, fmt("12 graphs N <= 183, max sin(angle) %.3g", worst));
}

void single_client_equivalence() {
  std::size_t matched = 0;
  for (Seed s = 0; s < 20; ++s) {
    const std::size_t k = 2 + s % 3;
    const std::size_t n = 30 + (s * 7) % 31;
    const Graph g = planted_partition(n, k, 0.5, 0.03, 10000 + s);
    FedPlusConfig cfg;
    cfg.num_clusters = k;
    cfg.global_rounds = 200;
    cfg.seed = 11000 + s;
    const std::vector<ClientShard> one{{0, g}};
    SpectralOptions opts;
    opts.method = EigenMethod::reference;
    if (run_fedspectral_plus(one, cfg).labels == global_spectral_clustering(g, k, cfg.seed, opts)) ++matched;
  }
  report("single_client_equivalence", matched == 20, std::to_string(matched) + "/20 graphs with identical labels");
}

void full_overlap_reduction() {
  bool all_equal = true;
  std::size_t compared = 0;
  for (Seed s = 0; s < 5; ++s) {
    const Graph g = planted_partition(50, 3, 0.3, 0.04, 12000 + s);
    FedPlusConfig cfg;
    cfg.num_clusters = 3;
    cfg.iters = 2;
    cfg.global_rounds = 8;
    cfg.seed = s;
    std::vector<Matrix> a, b;
    run_fedspectral_plus(distribute_edges(g, 3, 1.0, s), cfg, [&](std::size_t, const Matrix& v) { a.push_back(v); });
    const std::vector<ClientShard> one{{0, g}};
    run_fedspectral_plus(one, cfg, [&](std::size_t, const Matrix& v) { b.push_back(v); });
    all_equal &= a.size() == b.size();
    for (std::size_t t = 0; t < std::min(a.size(), b.size()); ++t, ++compared)
      all_equal &= std::memcmp(a[t].data().data(), b[t].data().data(), a[t].data().size() * sizeof(double)) == 0;
  }
  report("full_overlap_reduction", all_equal, std::to_string(compared) + " round embeddings compared bitwise");
}

void metric_properties() {
  bool oracle = true;
  for (Seed s = 0; s < 100; ++s) {
    const std::size_t n = 1 + (s * 37) % 300;
    const Labeling g = random_labeling(n, 1 + static_cast<int>(s % 9), 13000 + 2 * s);
    const Labeling a = random_labeling(n, 1 + static_cast<int>(s % 7), 13001 + 2 * s);
    oracle &= cluster_similarity(g, a) == similarity_oracle(g, a);
  }
  report("metric_oracle", oracle, "100 random pairs, N <= 300");

  const Labeling l = random_labeling(120, 6, 1);
  report("metric_identity", cluster_similarity(l, l) == 1.0, "similarity(l, l) = 1");

  Labeling renamed = l;
  for (int& x : renamed) x = 50 - x;
  const Labeling other = random_labeling(120, 4, 2);
  report("metric_relabel_invariance",
         cluster_similarity(l, other) == cluster_similarity(renamed, other) &&
             cluster_similarity(other, l) == cluster_similarity(other, renamed),
         "renaming either side leaves the score unchanged");

  const double v = cluster_similarity({0, 0, 0, 0}, {0, 1, 2, 3});
  const double w = cluster_similarity({0, 1, 2, 3}, {0, 0, 0, 0});
  report("metric_asymmetry_example", v == 0.25 && w == 1.0, fmt("N=4 example scores %.17g", v) + fmt(", reversed %.17g", w));
}

void partitioner_properties() {
  bool exact = true, conserved = true, deterministic = true;
  for (Seed s = 0; s < 50; ++s) {
    const Graph g = erdos_renyi(10 + (s * 17) % 150, 0.08, 14000 + s);
    const std::size_t c = 1 + s % 8;
    const PartitionPlan plan = make_partition_plan(c, 0.1 + 0.15 * static_cast<double>(s % 7), 15000 + s);
    const auto shards = distribute_edges(g, plan);
    std::map<std::pair<NodeId, NodeId>, std::size_t> count;
    for (const ClientShard& sh : shards)
      for (const Edge& e : sh.graph.edges()) ++count[{e.u, e.v}];
    conserved &= count.size() == g.num_edges();
    for (const Edge& e : g.edges()) {
      auto it = count.find({e.u, e.v});
      exact &= it != count.end() && it->second == plan.replication;
    }
    const auto again = distribute_edges(g, plan);
    for (std::size_t i = 0; i < c; ++i) deterministic &= shards[i].graph == again[i].graph;
  }
  report("partition_exact_replication", exact, "50 graphs, every edge on exactly r clients");
  report("partition_union_conservation", conserved, "50 graphs, union of shards equals the edge set");
  report("partition_determinism", deterministic, "50 graphs, same seed gives identical shards");
}

/// Forwards to real clients and checks that each frame is a bare N x K matrix.
class InspectingTransport final : public ClientTransport {
 public:
  InspectingTransport(std::span<const ClientShard> shards, std::size_t n, std::size_t k)
      : inner_(shards, 1, false), n_(n), k_(k) {}
  std::size_t num_clients() const override { return inner_.num_clients(); }
  std::vector<ClientMessage> exchange(const ServerMessage& msg) override {
    auto replies = inner_.exchange(wire::decode_server(wire::encode(msg)));
    for (auto& r : replies) {
      const auto bytes = wire::encode(r);
      ok = ok && bytes.size() == wire::kHeaderBytes + 8 * n_ * k_;
      r = wire::decode_client(bytes);
      ok = ok && r.embedding.rows() == n_ && r.embedding.cols() == k_;
    }
    return replies;
  }
  bool ok = true;

 private:
  InProcessTransport inner_;
  std::size_t n_, k_;
};

void privacy_boundary() {
  constexpr bool structural =
      std::is_constructible_v<FedPlusServer, std::size_t, FedPlusConfig> &&
      !std::is_constructible_v<FedPlusServer, std::span<const ClientShard>, FedPlusConfig> &&
      !std::is_constructible_v<FedPlusServer, Graph, FedPlusConfig> &&
      std::is_same_v<decltype(std::declval<ClientTransport&>().exchange(std::declval<const ServerMessage&>())),
                     std::vector<ClientMessage>> &&
      sizeof(ClientMessage) == sizeof(std::size_t) + sizeof(EmbeddingMatrix);
  const Graph g = planted_partition(40, 2, 0.4, 0.05, 16000);
  const auto shards = distribute_edges(g, 4, 0.5, 1);
  FedPlusConfig cfg;
  cfg.num_clusters = 2;
  cfg.global_rounds = 5;
  InspectingTransport t(shards, 40, 2);
  const bool same = FedPlusServer(40, cfg).run(t).labels == run_fedspectral_plus(shards, cfg).labels;
  report("privacy_boundary", structural && t.ok && same,
         "server built from (N, config) only; every round trip is an index plus an N x K frame");
}

}  // namespace

int main() {
  qr_round_trip();
  eigen_residuals();
  bottom_k_agreement();
  single_client_equivalence();
  full_overlap_reduction();
  metric_properties();
  partitioner_properties();
  privacy_boundary();
  return std::min(failures, 100);
}
