#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fedspectral/matrix.hpp"

namespace fedspectral {

struct QrResult {
  Matrix q;  ///< N x K, orthonormal columns
  Matrix r;  ///< K x K, upper triangular, non-negative diagonal
};

namespace detail {

/// Householder reduced QR without a rank check. Q always has orthonormal columns; where
/// the input loses rank the corresponding Q column is some unit vector orthogonal to the rest.
inline QrResult householder_qr(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw ContractError("QR: need rows >= cols, got " + std::to_string(m) + "x" + std::to_string(n));

  Matrix work = a;
  std::vector<std::vector<double>> reflectors(n);
  std::vector<double> dots(n);
  for (std::size_t j = 0; j < n; ++j) {
    double norm2 = 0.0;
    for (std::size_t i = j; i < m; ++i) norm2 += work(i, j) * work(i, j);
    const double norm = std::sqrt(norm2);
    std::vector<double>& v = reflectors[j];
    v.assign(m - j, 0.0);
    // zero column below the diagonal: no reflection, Q keeps the rotated e_j
    if (norm == 0.0) continue;
    const double x0 = work(j, j);
    const double alpha = x0 >= 0.0 ? -norm : norm;
    for (std::size_t i = j; i < m; ++i) v[i - j] = work(i, j);
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (double x : v) vnorm2 += x * x;
    const double vnorm = std::sqrt(vnorm2);
    for (double& x : v) x /= vnorm;

    // work[j:, j:] -= 2 v (vᵀ work[j:, j:])
    std::fill(dots.begin(), dots.end(), 0.0);
    for (std::size_t i = j; i < m; ++i) {
      const double vi = v[i - j];
      for (std::size_t c = j; c < n; ++c) dots[c] += vi * work(i, c);
    }
    for (std::size_t i = j; i < m; ++i) {
      const double vi = 2.0 * v[i - j];
      for (std::size_t c = j; c < n; ++c) work(i, c) -= vi * dots[c];
    }
  }

  Matrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = i; c < n; ++c) r(i, c) = work(i, c);

  Matrix q(m, n);
  for (std::size_t i = 0; i < n; ++i) q(i, i) = 1.0;
  for (std::size_t jj = n; jj-- > 0;) {
    const std::vector<double>& v = reflectors[jj];
    bool zero = true;
    for (double x : v) zero = zero && x == 0.0;
    if (zero) continue;
    std::fill(dots.begin(), dots.end(), 0.0);
    for (std::size_t i = jj; i < m; ++i) {
      const double vi = v[i - jj];
      for (std::size_t c = 0; c < n; ++c) dots[c] += vi * q(i, c);
    }
    for (std::size_t i = jj; i < m; ++i) {
      const double vi = 2.0 * v[i - jj];
      for (std::size_t c = 0; c < n; ++c) q(i, c) -= vi * dots[c];
    }
  }

  // diag(R) >= 0
  for (std::size_t j = 0; j < n; ++j) {
    if (r(j, j) >= 0.0) continue;
    for (std::size_t c = j; c < n; ++c) r(j, c) = -r(j, c);
    for (std::size_t i = 0; i < m; ++i) q(i, j) = -q(i, j);
  }
  return {std::move(q), std::move(r)};
}

}  // namespace detail

/// Reduced QR by Householder reflections: a = q·r with qᵀq = I and diag(r) >= 0.
/// Throws RankError naming the first column whose |r_jj| falls below 1e-12.
inline QrResult reduced_qr(const Matrix& a) {
  QrResult f = detail::householder_qr(a);
  for (std::size_t j = 0; j < f.r.rows(); ++j)
    if (std::abs(f.r(j, j)) < 1e-12)
      throw RankError("QR: input is rank deficient at column " + std::to_string(j), j);
  return f;
}

}  // namespace fedspectral
