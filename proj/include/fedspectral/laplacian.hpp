#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <vector>

#include "fedspectral/graph.hpp"
#include "fedspectral/matrix.hpp"

namespace fedspectral {

/// Anything that can apply a normalized Laplacian to an N x K block.
template <class Op>
concept LaplacianLike = requires(const Op& op, const Matrix& v) {
  { op.size() } -> std::convertible_to<std::size_t>;
  { op.apply(v) } -> std::same_as<Matrix>;
};

/// Dense normalized Laplacian L = I - D^-1/2 A D^-1/2.
///
/// Rows and columns of degree-0 nodes are entirely zero (not 1 on the diagonal), so the
/// power-iteration multiplier I - L is the identity on those nodes.
class LaplacianMatrix {
 public:
  LaplacianMatrix() = default;
  explicit LaplacianMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols()) throw ContractError("LaplacianMatrix: matrix must be square");
  }

  std::size_t size() const noexcept { return values_.rows(); }
  const Matrix& matrix() const noexcept { return values_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }

  Matrix apply(const Matrix& v) const {
    if (v.rows() != size()) throw ContractError("LaplacianMatrix::apply: row count mismatch");
    return values_ * v;
  }

 private:
  Matrix values_;
};

namespace detail {

inline std::vector<double> inverse_sqrt(const std::vector<double>& degree) {
  std::vector<double> out(degree.size(), 0.0);
  for (std::size_t i = 0; i < degree.size(); ++i)
    if (degree[i] > 0.0) out[i] = 1.0 / std::sqrt(degree[i]);
  return out;
}

}  // namespace detail

inline LaplacianMatrix normalized_laplacian(const Graph& g) {
  const std::size_t n = g.num_nodes();
  const auto inv_sqrt = detail::inverse_sqrt(g.degrees());
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i)
    if (inv_sqrt[i] > 0.0) l(i, i) = 1.0;
  for (const Edge& e : g.edges()) {
    const double x = -e.weight * inv_sqrt[e.u] * inv_sqrt[e.v];
    l(e.u, e.v) = x;
    l(e.v, e.u) = x;
  }
  return LaplacianMatrix(std::move(l));
}

/// Normalized Laplacian of a dense symmetric non-negative weight matrix. Diagonal weights
/// count as self-loops (they add to the degree); callers that do not want that zero them first.
inline LaplacianMatrix normalized_laplacian(const Matrix& adjacency) {
  const std::size_t n = adjacency.rows();
  if (adjacency.cols() != n) throw ContractError("normalized_laplacian: adjacency must be square");
  std::vector<double> degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = adjacency(i, j);
      if (w < 0.0) throw ContractError("normalized_laplacian: negative weight");
      if (std::abs(w - adjacency(j, i)) > 1e-12) throw ContractError("normalized_laplacian: adjacency not symmetric");
      degree[i] += w;
    }
  }
  const auto inv_sqrt = detail::inverse_sqrt(degree);
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (inv_sqrt[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      l(i, j) = (i == j ? 1.0 : 0.0) - adjacency(i, j) * inv_sqrt[i] * inv_sqrt[j];
    }
  }
  return LaplacianMatrix(std::move(l));
}

/// The same normalized Laplacian applied straight from a graph's edge list, O(|E|·K) per product.
/// Used where the N x N matrix would be wasteful (large shards, repeated power iterations).
class LaplacianOperator {
 public:
  explicit LaplacianOperator(const Graph& g) : n_(g.num_nodes()), offsets_(g.num_nodes() + 1, 0) {
    const auto inv_sqrt = detail::inverse_sqrt(g.degrees());
    for (const Edge& e : g.edges()) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
    neighbors_.resize(offsets_.back());
    weights_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    // edges are sorted by (u, v), so each neighbor list comes out in a fixed order
    for (const Edge& e : g.edges()) {
      const double w = e.weight * inv_sqrt[e.u] * inv_sqrt[e.v];
      neighbors_[fill[e.u]] = e.v;
      weights_[fill[e.u]++] = w;
      neighbors_[fill[e.v]] = e.u;
      weights_[fill[e.v]++] = w;
    }
  }

  std::size_t size() const noexcept { return n_; }
  bool is_isolated(std::size_t i) const noexcept { return offsets_[i] == offsets_[i + 1]; }

  /// L·v
  Matrix apply(const Matrix& v) const {
    if (v.rows() != n_) throw ContractError("LaplacianOperator::apply: row count mismatch");
    Matrix out(n_, v.cols());
    for (std::size_t i = 0; i < n_; ++i) {
      if (is_isolated(i)) continue;
      auto o = out.row(i);
      auto vi = v.row(i);
      for (std::size_t c = 0; c < o.size(); ++c) o[c] = vi[c];
      for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) {
        auto vj = v.row(neighbors_[p]);
        const double w = weights_[p];
        for (std::size_t c = 0; c < o.size(); ++c) o[c] -= w * vj[c];
      }
    }
    return out;
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::vector<double> weights_;
};

static_assert(LaplacianLike<LaplacianMatrix>);
static_assert(LaplacianLike<LaplacianOperator>);

}  // namespace fedspectral
