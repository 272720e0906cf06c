#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "fedspectral/eigen.hpp"
#include "fedspectral/graph.hpp"
#include "fedspectral/kmeans.hpp"
#include "fedspectral/laplacian.hpp"

namespace fedspectral {

enum class EigenMethod {
  automatic,  ///< reference for N <= reference_max_nodes, subspace iteration above
  reference,  ///< dense tridiagonal QL, all eigenpairs
  subspace,   ///< orthogonal iteration, bottom k only
};

struct SpectralOptions {
  EigenMethod method = EigenMethod::automatic;
  std::size_t reference_max_nodes = 1200;
  /// Scale each embedding row to unit length before k-means. Off by default: the embedding
  /// is clustered as-is.
  bool normalize_rows = false;
  SubspaceOptions subspace{};
};

/// What the eigen step did; surfaced in experiment diagnostics.
struct SpectralDiagnostics {
  EigenMethod method_used = EigenMethod::reference;
  bool converged = true;
  std::size_t sweeps = 0;
  double residual = 0.0;
};

namespace detail {

inline EigenMethod resolve(const SpectralOptions& opts, std::size_t n) {
  if (opts.method != EigenMethod::automatic) return opts.method;
  return n <= opts.reference_max_nodes ? EigenMethod::reference : EigenMethod::subspace;
}

inline Matrix leading_columns(const Matrix& v, std::size_t k) {
  Matrix out(v.rows(), k);
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < k; ++c) out(r, c) = v(r, c);
  return out;
}

inline Matrix embedding_from_reference(const LaplacianMatrix& l, std::size_t k, SpectralDiagnostics* diag) {
  const EigenDecomposition eig = symmetric_eig_reference(l.matrix());
  Matrix v = leading_columns(eig.vectors, k);
  if (diag) {
    diag->method_used = EigenMethod::reference;
    diag->converged = true;
    diag->sweeps = 0;
    const Matrix lv = l.apply(v);
    diag->residual = max_abs(lv - v * transpose_times(v, lv));
  }
  return v;
}

template <LaplacianLike Op>
Matrix embedding_from_subspace(const Op& l, std::size_t k, Seed seed, const SpectralOptions& opts,
                               SpectralDiagnostics* diag) {
  EigenBlock block = bottom_k_eigenpairs(l, k, seed, opts.subspace);
  if (diag) {
    diag->method_used = EigenMethod::subspace;
    diag->converged = block.converged;
    diag->sweeps = block.sweeps;
    diag->residual = block.residual;
  }
  return std::move(block.vectors);
}

}  // namespace detail

/// N x k spectral embedding (bottom-k Laplacian eigenvectors) of a dense Laplacian.
inline Matrix spectral_embedding(const LaplacianMatrix& l, std::size_t k, Seed seed, const SpectralOptions& opts = {},
                                 SpectralDiagnostics* diag = nullptr) {
  if (k == 0 || k > l.size()) throw ContractError("spectral_embedding: need 1 <= k <= N");
  if (detail::resolve(opts, l.size()) == EigenMethod::reference) return detail::embedding_from_reference(l, k, diag);
  return detail::embedding_from_subspace(l, k, seed, opts, diag);
}

/// Same, straight from a graph; the subspace path never materializes the N x N Laplacian.
inline Matrix spectral_embedding(const Graph& g, std::size_t k, Seed seed, const SpectralOptions& opts = {},
                                 SpectralDiagnostics* diag = nullptr) {
  if (k == 0 || k > g.num_nodes()) throw ContractError("spectral_embedding: need 1 <= k <= N");
  if (detail::resolve(opts, g.num_nodes()) == EigenMethod::reference)
    return detail::embedding_from_reference(normalized_laplacian(g), k, diag);
  return detail::embedding_from_subspace(LaplacianOperator(g), k, seed, opts, diag);
}

inline void normalize_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (double x : m.row(r)) s += x * x;
    if (s == 0.0) continue;
    const double inv = 1.0 / std::sqrt(s);
    for (double& x : m.row(r)) x *= inv;
  }
}

/// k-means on embedding rows; the one place the row-normalization flag applies.
inline Labeling cluster_embedding(Matrix embedding, std::size_t k, Seed kmeans_seed, const SpectralOptions& opts = {}) {
  if (opts.normalize_rows) normalize_rows(embedding);
  return kmeans(embedding, k, kmeans_seed);
}

/// Seeds used by the spectral pipeline. Any pipeline that clusters a final embedding with
/// `kmeans_seed(s)` produces labels comparable to global_spectral_clustering(·, ·, s).
inline Seed eigen_seed(Seed seed) { return derive_seed(seed, "eigen"); }
inline Seed kmeans_seed(Seed seed) { return derive_seed(seed, "kmeans"); }

/// Spectral clustering of a whole graph: normalized Laplacian, bottom-k eigenvectors,
/// k-means on node rows. The reference labeling federated runs are scored against.
inline Labeling global_spectral_clustering(const Graph& g, std::size_t k, Seed seed, const SpectralOptions& opts = {},
                                           SpectralDiagnostics* diag = nullptr) {
  return cluster_embedding(spectral_embedding(g, k, eigen_seed(seed), opts, diag), k, kmeans_seed(seed), opts);
}

inline std::string to_string(EigenMethod m) {
  switch (m) {
    case EigenMethod::automatic: return "automatic";
    case EigenMethod::reference: return "reference";
    case EigenMethod::subspace: return "subspace";
  }
  return "?";
}

}  // namespace fedspectral
