#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <exception>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "fedspectral/kmeans.hpp"
#include "fedspectral/laplacian.hpp"
#include "fedspectral/partition.hpp"
#include "fedspectral/qr.hpp"
#include "fedspectral/random.hpp"
#include "fedspectral/spectral.hpp"

namespace fedspectral {

struct FedPlusConfig {
  std::size_t num_clusters = 2;
  std::size_t iters = 1;          ///< power iterations per client per round
  std::size_t global_rounds = 1;
  Seed seed = 0;
  /// Clients multiply by (I + M)/2 instead of M = I - L. Moves the spectrum of the
  /// multiplier from [-1, 1] to [0, 1], which stops bipartite shards from oscillating.
  bool damping = false;
  /// Run the clients of a round on separate threads. Results are identical either way.
  bool parallel_clients = false;
  bool normalize_rows = false;  ///< unit-length rows before the final k-means

  void validate() const {
    if (num_clusters < 1) throw ConfigError("num_clusters must be at least 1");
    if (iters < 1) throw ConfigError("iters must be at least 1");
    if (global_rounds < 1) throw ConfigError("global_rounds must be at least 1");
  }
};

/// Server -> client: the current N x K embedding for a round.
struct ServerMessage {
  std::size_t round_index = 0;
  EmbeddingMatrix embedding;
};

/// Client -> server: the embedding after local power iterations.
struct ClientMessage {
  std::size_t client_id = 0;
  EmbeddingMatrix embedding;
};

/// M^iters · v with M = I - L_shard (or (I + M)/2 when damped). M is the identity on
/// shard-isolated nodes, so their rows pass through unchanged.
inline EmbeddingMatrix client_power_iteration(const LaplacianOperator& laplacian, std::size_t iters,
                                              EmbeddingMatrix v, bool damping = false) {
  if (v.rows() != laplacian.size())
    throw ContractError("client_power_iteration: embedding has " + std::to_string(v.rows()) + " rows, shard has " +
                        std::to_string(laplacian.size()) + " nodes");
  if (iters < 1) throw ContractError("client_power_iteration: iters must be at least 1");
  for (std::size_t it = 0; it < iters; ++it) {
    Matrix mv = v - laplacian.apply(v);
    v = damping ? 0.5 * (v + mv) : std::move(mv);
  }
  return v;
}

inline EmbeddingMatrix client_power_iteration(const ClientShard& shard, std::size_t iters, const EmbeddingMatrix& v,
                                              bool damping = false) {
  return client_power_iteration(LaplacianOperator(shard.graph), iters, v, damping);
}

/// One participant. Its shard never leaves this object; the only way in or out is a message.
class PowerIterationClient {
 public:
  PowerIterationClient(ClientShard shard, std::size_t iters, bool damping)
      : id_(shard.client_id), laplacian_(shard.graph), iters_(iters), damping_(damping) {}

  std::size_t id() const noexcept { return id_; }
  std::size_t num_nodes() const noexcept { return laplacian_.size(); }

  ClientMessage respond(const ServerMessage& msg) const {
    return ClientMessage{id_, client_power_iteration(laplacian_, iters_, msg.embedding, damping_)};
  }

 private:
  std::size_t id_;
  LaplacianOperator laplacian_;
  std::size_t iters_;
  bool damping_;
};

/// How the server reaches its clients. An implementation delivers one ServerMessage to every
/// client and returns the replies ordered by client position (not by arrival).
class ClientTransport {
 public:
  virtual ~ClientTransport() = default;
  virtual std::size_t num_clients() const = 0;
  virtual std::vector<ClientMessage> exchange(const ServerMessage& msg) = 0;
};

/// All clients live in this process, optionally one thread each per round.
class InProcessTransport final : public ClientTransport {
 public:
  InProcessTransport(std::span<const ClientShard> shards, std::size_t iters, bool damping, bool parallel = false)
      : parallel_(parallel) {
    clients_.reserve(shards.size());
    for (const ClientShard& s : shards) clients_.emplace_back(s, iters, damping);
  }

  std::size_t num_clients() const override { return clients_.size(); }

  std::vector<ClientMessage> exchange(const ServerMessage& msg) override {
    std::vector<ClientMessage> replies(clients_.size());
    if (!parallel_ || clients_.size() < 2) {
      for (std::size_t c = 0; c < clients_.size(); ++c) replies[c] = clients_[c].respond(msg);
      return replies;
    }
    std::vector<std::exception_ptr> errors(clients_.size());
    {
      std::vector<std::jthread> workers;
      workers.reserve(clients_.size());
      for (std::size_t c = 0; c < clients_.size(); ++c) {
        workers.emplace_back([&, c] {
          try {
            replies[c] = clients_[c].respond(msg);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
    return replies;
  }

 private:
  std::vector<PowerIterationClient> clients_;
  bool parallel_;
};

/// Elementwise mean in ascending client order followed by reduced QR; returns Q.
///
/// The mean is a running update m += (x_c - m) / c, which returns the input bit-for-bit
/// when every client sends the same matrix.
inline EmbeddingMatrix aggregate_round(std::span<const EmbeddingMatrix> client_outputs) {
  if (client_outputs.empty()) throw ContractError("aggregate_round: no client outputs");
  EmbeddingMatrix mean = client_outputs.front();
  for (std::size_t c = 1; c < client_outputs.size(); ++c) {
    require_same_shape(mean, client_outputs[c], "aggregate_round");
    auto m = mean.data();
    auto x = client_outputs[c].data();
    const double count = static_cast<double>(c + 1);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += (x[i] - m[i]) / count;
  }
  if (!all_finite(mean)) throw NumericalError("aggregate_round: non-finite entry in averaged embedding");
  return reduced_qr(mean).q;
}

/// Per-round diagnostics.
struct RoundRecord {
  std::size_t round = 0;
  double drift = 0.0;             ///< |v_t - v_{t-1} v_{t-1}ᵀ v_t|_max
  double max_abs_entry = 0.0;     ///< largest client output entry
  double orthonormality = 0.0;    ///< |v_tᵀ v_t - I|_max
};

struct FedPlusResult {
  Labeling labels;
  EmbeddingMatrix embedding;
  std::vector<RoundRecord> rounds;
};

/// Called with (round, v) after each aggregation; round 0 is the orthonormalized start.
using RoundObserver = std::function<void(std::size_t, const EmbeddingMatrix&)>;

/// Server side of the power-iteration protocol. It knows the node count and the config and
/// talks to clients only through a ClientTransport.
class FedPlusServer {
 public:
  FedPlusServer(std::size_t num_nodes, FedPlusConfig cfg) : num_nodes_(num_nodes), cfg_(cfg) {
    cfg_.validate();
    if (cfg_.num_clusters > num_nodes_) throw ConfigError("num_clusters exceeds the number of nodes");
  }

  /// Initial embedding: Gaussian N x K, orthonormalized.
  EmbeddingMatrix initial_embedding() const {
    return reduced_qr(gaussian_matrix(num_nodes_, cfg_.num_clusters, derive_seed(cfg_.seed, "init"))).q;
  }

  FedPlusResult run(ClientTransport& transport, const RoundObserver& observer = {}) const {
    if (transport.num_clients() == 0) throw ContractError("FedPlusServer: no clients");
    FedPlusResult out;
    EmbeddingMatrix v = initial_embedding();
    if (observer) observer(0, v);
    std::vector<EmbeddingMatrix> outputs(transport.num_clients());
    for (std::size_t round = 1; round <= cfg_.global_rounds; ++round) {
      std::vector<ClientMessage> replies = transport.exchange(ServerMessage{round, v});
      if (replies.size() != outputs.size())
        throw ContractError("FedPlusServer: expected " + std::to_string(outputs.size()) + " replies, got " +
                            std::to_string(replies.size()));
      RoundRecord rec{round, 0.0, 0.0, 0.0};
      for (std::size_t c = 0; c < replies.size(); ++c) {
        if (replies[c].embedding.rows() != num_nodes_ || replies[c].embedding.cols() != cfg_.num_clusters)
          throw ContractError("FedPlusServer: client " + std::to_string(replies[c].client_id) +
                              " returned a matrix of the wrong shape");
        if (!all_finite(replies[c].embedding))
          throw NumericalError("FedPlusServer: client " + std::to_string(replies[c].client_id) +
                               " returned non-finite entries in round " + std::to_string(round));
        rec.max_abs_entry = std::max(rec.max_abs_entry, max_abs(replies[c].embedding));
        outputs[c] = std::move(replies[c].embedding);
      }
      EmbeddingMatrix next;
      try {
        next = aggregate_round(outputs);
      } catch (const RankError& e) {
        throw RankError("round " + std::to_string(round) + ": " + e.what(), e.column());
      }
      rec.drift = subspace_drift(v, next);
      rec.orthonormality = orthonormality_error(next);
      out.rounds.push_back(rec);
      v = std::move(next);
      if (observer) observer(round, v);
    }
    SpectralOptions clustering;
    clustering.normalize_rows = cfg_.normalize_rows;
    out.labels = cluster_embedding(v, cfg_.num_clusters, kmeans_seed(cfg_.seed), clustering);
    out.embedding = std::move(v);
    return out;
  }

 private:
  std::size_t num_nodes_;
  FedPlusConfig cfg_;
};

/// Whole protocol over in-process clients.
inline FedPlusResult run_fedspectral_plus(std::span<const ClientShard> shards, const FedPlusConfig& cfg,
                                          const RoundObserver& observer = {}) {
  if (shards.empty()) throw ContractError("run_fedspectral_plus: no clients");
  const std::size_t n = shards.front().num_nodes();
  for (const ClientShard& s : shards)
    if (s.num_nodes() != n) throw ContractError("run_fedspectral_plus: shards disagree on node universe");
  InProcessTransport transport(shards, cfg.iters, cfg.damping, cfg.parallel_clients);
  return FedPlusServer(n, cfg).run(transport, observer);
}

// Wire format for a network transport. Both message kinds share one layout, all fields
// little-endian:
//   u64 index (round_index or client_id) | u64 rows (N) | u64 cols (K) | f64[N*K] row-major
namespace wire {

namespace detail {

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t x) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(x >> (8 * b)));
}

inline std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint64_t x = 0;
  for (int b = 0; b < 8; ++b) x |= static_cast<std::uint64_t>(in[at + b]) << (8 * b);
  return x;
}

}  // namespace detail

constexpr std::size_t kHeaderBytes = 24;

inline std::vector<std::uint8_t> encode(std::uint64_t index, const Matrix& m) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 8 * m.data().size());
  detail::put_u64(out, index);
  detail::put_u64(out, m.rows());
  detail::put_u64(out, m.cols());
  for (double x : m.data()) detail::put_u64(out, std::bit_cast<std::uint64_t>(x));
  return out;
}

inline std::vector<std::uint8_t> encode(const ServerMessage& msg) { return encode(msg.round_index, msg.embedding); }
inline std::vector<std::uint8_t> encode(const ClientMessage& msg) { return encode(msg.client_id, msg.embedding); }

struct Frame {
  std::uint64_t index = 0;
  Matrix payload;
};

inline Frame decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw ParseError("wire: frame shorter than header", 0);
  Frame f;
  f.index = detail::get_u64(bytes, 0);
  const std::uint64_t rows = detail::get_u64(bytes, 8);
  const std::uint64_t cols = detail::get_u64(bytes, 16);
  if (cols != 0 && rows > (bytes.size() - kHeaderBytes) / 8 / cols)
    throw ParseError("wire: payload shorter than rows x cols", 0);
  if (bytes.size() != kHeaderBytes + 8 * rows * cols) throw ParseError("wire: frame length does not match header", 0);
  f.payload = Matrix(rows, cols);
  auto data = f.payload.data();
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = std::bit_cast<double>(detail::get_u64(bytes, kHeaderBytes + 8 * i));
  return f;
}

inline ServerMessage decode_server(std::span<const std::uint8_t> bytes) {
  Frame f = decode(bytes);
  return ServerMessage{f.index, std::move(f.payload)};
}

inline ClientMessage decode_client(std::span<const std::uint8_t> bytes) {
  Frame f = decode(bytes);
  return ClientMessage{f.index, std::move(f.payload)};
}

}  // namespace wire

}  // namespace fedspectral
