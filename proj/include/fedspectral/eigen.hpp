#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "fedspectral/laplacian.hpp"
#include "fedspectral/matrix.hpp"
#include "fedspectral/qr.hpp"
#include "fedspectral/random.hpp"

namespace fedspectral {

struct EigenDecomposition {
  std::vector<double> values;  ///< ascending
  Matrix vectors;              ///< column i belongs to values[i]
};

namespace detail {

/// Flip each column so its first component with magnitude above 1e-10 is positive.
inline void canonicalize_signs(Matrix& v) {
  for (std::size_t c = 0; c < v.cols(); ++c) {
    for (std::size_t r = 0; r < v.rows(); ++r) {
      const double x = v(r, c);
      if (std::abs(x) <= 1e-10) continue;
      if (x < 0.0)
        for (std::size_t i = 0; i < v.rows(); ++i) v(i, c) = -v(i, c);
      break;
    }
  }
}

// Householder reduction to tridiagonal form followed by implicit QL, after the EISPACK
// tred2/tql2 pair. `vt` holds the transpose of the eigenvector matrix so that the Givens
// rotations in the QL sweep touch contiguous rows.
class TridiagonalQl {
 public:
  explicit TridiagonalQl(const Matrix& a) : n_(a.rows()), vt_(a.transpose()), d_(n_), e_(n_) {}

  EigenDecomposition solve() {
    if (n_ == 0) return {};
    reduce();
    diagonalize();
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) { return d_[a] < d_[b]; });
    EigenDecomposition out{std::vector<double>(n_), Matrix(n_, n_)};
    for (std::size_t c = 0; c < n_; ++c) {
      out.values[c] = d_[order[c]];
      auto src = vt_.row(order[c]);
      for (std::size_t r = 0; r < n_; ++r) out.vectors(r, c) = src[r];
    }
    canonicalize_signs(out.vectors);
    return out;
  }

 private:
  // V(i, j) of the textbook formulation
  double& v(std::size_t i, std::size_t j) { return vt_(j, i); }

  void reduce() {
    const std::size_t n = n_;
    for (std::size_t j = 0; j < n; ++j) d_[j] = v(n - 1, j);
    for (std::size_t i = n - 1; i > 0; --i) {
      double scale = 0.0;
      double h = 0.0;
      for (std::size_t k = 0; k < i; ++k) scale += std::abs(d_[k]);
      if (scale == 0.0) {
        e_[i] = d_[i - 1];
        for (std::size_t j = 0; j < i; ++j) {
          d_[j] = v(i - 1, j);
          v(i, j) = 0.0;
          v(j, i) = 0.0;
        }
      } else {
        for (std::size_t k = 0; k < i; ++k) {
          d_[k] /= scale;
          h += d_[k] * d_[k];
        }
        double f = d_[i - 1];
        double g = std::sqrt(h);
        if (f > 0) g = -g;
        e_[i] = scale * g;
        h -= f * g;
        d_[i - 1] = f - g;
        for (std::size_t j = 0; j < i; ++j) e_[j] = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
          f = d_[j];
          v(j, i) = f;
          g = e_[j] + v(j, j) * f;
          for (std::size_t k = j + 1; k <= i - 1; ++k) {
            g += v(k, j) * d_[k];
            e_[k] += v(k, j) * f;
          }
          e_[j] = g;
        }
        f = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
          e_[j] /= h;
          f += e_[j] * d_[j];
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j < i; ++j) e_[j] -= hh * d_[j];
        for (std::size_t j = 0; j < i; ++j) {
          f = d_[j];
          g = e_[j];
          for (std::size_t k = j; k <= i - 1; ++k) v(k, j) -= (f * e_[k] + g * d_[k]);
          d_[j] = v(i - 1, j);
          v(i, j) = 0.0;
        }
      }
      d_[i] = h;
    }

    // accumulate transformations
    for (std::size_t i = 0; i + 1 < n; ++i) {
      v(n - 1, i) = v(i, i);
      v(i, i) = 1.0;
      const double h = d_[i + 1];
      if (h != 0.0) {
        for (std::size_t k = 0; k <= i; ++k) d_[k] = v(k, i + 1) / h;
        for (std::size_t j = 0; j <= i; ++j) {
          double g = 0.0;
          for (std::size_t k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
          for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d_[k];
        }
      }
      for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
      d_[j] = v(n - 1, j);
      v(n - 1, j) = 0.0;
    }
    v(n - 1, n - 1) = 1.0;
    e_[0] = 0.0;
  }

  void diagonalize() {
    const std::size_t n = n_;
    for (std::size_t i = 1; i < n; ++i) e_[i - 1] = e_[i];
    e_[n - 1] = 0.0;
    double f = 0.0;
    double tst1 = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    constexpr int kMaxIterations = 64;
    for (std::size_t l = 0; l < n; ++l) {
      tst1 = std::max(tst1, std::abs(d_[l]) + std::abs(e_[l]));
      std::size_t m = l;
      while (m < n && std::abs(e_[m]) > eps * tst1) ++m;
      if (m > l) {
        int iter = 0;
        do {
          if (++iter > kMaxIterations)
            throw NumericalError("symmetric eigensolver: QL iteration did not converge for eigenvalue " +
                                 std::to_string(l));
          double g = d_[l];
          double p = (d_[l + 1] - g) / (2.0 * e_[l]);
          double r = std::hypot(p, 1.0);
          if (p < 0) r = -r;
          d_[l] = e_[l] / (p + r);
          d_[l + 1] = e_[l] * (p + r);
          const double dl1 = d_[l + 1];
          double h = g - d_[l];
          for (std::size_t i = l + 2; i < n; ++i) d_[i] -= h;
          f += h;

          p = d_[m];
          double c = 1.0, c2 = 1.0, c3 = 1.0;
          const double el1 = e_[l + 1];
          double s = 0.0, s2 = 0.0;
          for (std::size_t i = m; i-- > l;) {
            c3 = c2;
            c2 = c;
            s2 = s;
            g = c * e_[i];
            h = c * p;
            r = std::hypot(p, e_[i]);
            e_[i + 1] = s * r;
            s = e_[i] / r;
            c = p / r;
            p = c * d_[i] - s * g;
            d_[i + 1] = h + s * (c * g + s * d_[i]);
            auto col_i = vt_.row(i);
            auto col_next = vt_.row(i + 1);
            for (std::size_t k = 0; k < n; ++k) {
              h = col_next[k];
              col_next[k] = s * col_i[k] + c * h;
              col_i[k] = c * col_i[k] - s * h;
            }
          }
          p = -s * s2 * c3 * el1 * e_[l] / dl1;
          e_[l] = s * p;
          d_[l] = c * p;
        } while (std::abs(e_[l]) > eps * tst1);
      }
      d_[l] += f;
      e_[l] = 0.0;
    }
  }

  std::size_t n_;
  Matrix vt_;
  std::vector<double> d_;
  std::vector<double> e_;
};

}  // namespace detail

/// Full eigendecomposition of a dense symmetric matrix, eigenvalues ascending, each
/// eigenvector's first non-negligible component positive. O(N³); the correctness oracle for
/// the iterative solver and the workhorse for small shards.
inline EigenDecomposition symmetric_eig_reference(const Matrix& a) {
  if (a.rows() != a.cols()) throw ContractError("symmetric_eig_reference: matrix must be square");
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-10)
        throw ContractError("symmetric_eig_reference: matrix is not symmetric at (" + std::to_string(i) + "," +
                            std::to_string(j) + ")");
  if (!all_finite(a)) throw ContractError("symmetric_eig_reference: non-finite entry");
  return detail::TridiagonalQl(a).solve();
}

struct SubspaceOptions {
  std::size_t max_sweeps = 1000;
  double tolerance = 1e-9;      ///< subspace drift between checks that counts as converged
  std::size_t oversample = 0;   ///< extra block columns; 0 picks max(k, 8)
  std::size_t check_interval = 5;
};

/// Bottom-k eigenpairs of a normalized Laplacian, with diagnostics.
struct EigenBlock {
  Matrix vectors;                   ///< N x k, orthonormal columns
  std::vector<double> eigenvalues;  ///< Rayleigh quotients, ascending
  std::size_t sweeps = 0;
  bool converged = false;
  double residual = 0.0;            ///< max |L V - V (VᵀLV)|
  double boundary_gap = std::numeric_limits<double>::infinity();  ///< Ritz estimate of λ_{k+1} - λ_k
};

/// Orthogonal iteration for the k smallest eigenvalues of a normalized Laplacian.
///
/// Iterates on S = I - L/2, whose spectrum [0, 1] is the Laplacian's reversed, so the wanted
/// eigenvectors dominate and the λ = 2 end (bipartite components) cannot compete. The block
/// carries `oversample` extra columns and is Rayleigh-Ritz rotated every `check_interval` sweeps;
/// convergence is declared when the span of the leading k Ritz vectors moves less than
/// `tolerance` between checks.
template <LaplacianLike Op>
EigenBlock bottom_k_eigenpairs(const Op& laplacian, std::size_t k, Seed seed, const SubspaceOptions& opts = {}) {
  const std::size_t n = laplacian.size();
  if (k == 0 || k > n) throw ContractError("bottom_k_eigenvectors: need 1 <= k <= N");
  const std::size_t extra = opts.oversample == 0 ? std::max<std::size_t>(k, 8) : opts.oversample;
  const std::size_t block = std::min(n, k + extra);
  const std::size_t interval = std::max<std::size_t>(1, opts.check_interval);

  auto shifted = [&laplacian](const Matrix& v) { return v - 0.5 * laplacian.apply(v); };

  Matrix v = detail::householder_qr(gaussian_matrix(n, block, seed)).q;
  Matrix sv = shifted(v);
  Matrix previous;
  EigenBlock out;
  std::vector<double> ritz;
  for (std::size_t sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    v = detail::householder_qr(sv).q;
    sv = shifted(v);
    out.sweeps = sweep;
    if (sweep % interval != 0 && sweep != opts.max_sweeps) continue;

    // Rayleigh-Ritz on the block; ascending eigenvalues of -VᵀSV put dominant directions first.
    Matrix h = transpose_times(v, sv);
    for (std::size_t i = 0; i < block; ++i)
      for (std::size_t j = 0; j < i; ++j) h(i, j) = h(j, i) = -0.5 * (h(i, j) + h(j, i));
    for (std::size_t i = 0; i < block; ++i) h(i, i) = -h(i, i);
    EigenDecomposition small = symmetric_eig_reference(h);
    v = v * small.vectors;
    sv = sv * small.vectors;
    ritz = small.values;

    Matrix leading(n, k);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < k; ++c) leading(r, c) = v(r, c);
    if (!previous.empty() && subspace_drift(previous, leading) < opts.tolerance) {
      out.converged = true;
      break;
    }
    previous = std::move(leading);
  }

  Matrix vk(n, k);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < k; ++c) vk(r, c) = v(r, c);
  detail::canonicalize_signs(vk);
  const Matrix lv = laplacian.apply(vk);
  const Matrix rayleigh = transpose_times(vk, lv);
  out.residual = max_abs(lv - vk * rayleigh);
  out.eigenvalues.resize(k);
  for (std::size_t c = 0; c < k; ++c) out.eigenvalues[c] = rayleigh(c, c);
  // `ritz` holds -θ for Ritz values θ of S, and λ = 2(1 - θ)
  if (block > k && ritz.size() > k) out.boundary_gap = 2.0 * (ritz[k] - ritz[k - 1]);
  out.vectors = std::move(vk);
  return out;
}

/// N x k orthonormal basis of the invariant subspace of the k smallest Laplacian eigenvalues.
template <LaplacianLike Op>
Matrix bottom_k_eigenvectors(const Op& laplacian, std::size_t k, Seed seed, const SubspaceOptions& opts = {}) {
  return bottom_k_eigenpairs(laplacian, k, seed, opts).vectors;
}

/// Largest sine of the principal angles between two subspaces given by orthonormal bases.
inline double principal_angle_sine(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ContractError("principal_angle_sine: shape mismatch");
  // the part of b outside span(a); its spectral norm is the sine of the largest angle
  const Matrix outside = b - a * transpose_times(a, b);
  const EigenDecomposition eig = symmetric_eig_reference(transpose_times(outside, outside));
  return std::sqrt(std::max(0.0, eig.values.back()));
}

}  // namespace fedspectral
