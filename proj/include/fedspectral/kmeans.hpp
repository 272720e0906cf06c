#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include "fedspectral/matrix.hpp"
#include "fedspectral/random.hpp"

namespace fedspectral {

/// Cluster id per node, each in [0, K).
using Labeling = std::vector<int>;

struct KMeansOptions {
  std::size_t max_iterations = 300;
};

struct KMeansResult {
  Labeling labels;
  Matrix centroids;
  std::vector<double> objective_history;  ///< sum of squared distances after each centroid update
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Nearest centroid per point; ties go to the lower cluster id.
inline Labeling assign(const Matrix& points, const Matrix& centroids) {
  Labeling labels(points.rows(), 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      const double d = squared_distance(points.row(i), centroids.row(c));
      if (d < best) {
        best = d;
        labels[i] = static_cast<int>(c);
      }
    }
  }
  return labels;
}

inline double objective(const Matrix& points, const Matrix& centroids, const Labeling& labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i)
    s += squared_distance(points.row(i), centroids.row(static_cast<std::size_t>(labels[i])));
  return s;
}

/// k-means++ seeding. When every remaining point coincides with a chosen center the next
/// center is the lowest-index point not yet chosen, so duplicate rows never abort seeding.
inline Matrix plus_plus_seeds(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centers(k, points.cols());
  std::vector<bool> chosen(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

  auto take = [&](std::size_t idx, std::size_t slot) {
    chosen[idx] = true;
    auto src = points.row(idx);
    std::copy(src.begin(), src.end(), centers.row(slot).begin());
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_distance(points.row(i), src));
  };

  take(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng), 0);
  for (std::size_t slot = 1; slot < k; ++slot) {
    double total = 0.0;
    for (double d : nearest) total += d;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      double running = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        running += nearest[i];
        pick = i;
        if (running >= target) break;
      }
    }
    if (pick == n) {
      pick = 0;
      while (pick < n && chosen[pick]) ++pick;
      if (pick == n) pick = 0;
    }
    take(pick, slot);
  }
  return centers;
}

/// Mean of each cluster. Empty clusters take the point farthest from its own centroid,
/// provided that distance is positive.
inline Matrix update_centroids(const Matrix& points, Labeling& labels, std::size_t k, const Matrix& previous) {
  const std::size_t dim = points.cols();
  Matrix centroids(k, dim);
  std::vector<std::size_t> counts(k, 0);
  auto recompute = [&]() {
    centroids = Matrix(k, dim);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      ++counts[c];
      auto dst = centroids.row(c);
      auto src = points.row(i);
      for (std::size_t d = 0; d < dim; ++d) dst[d] += src[d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      auto dst = centroids.row(c);
      if (counts[c] == 0) {
        auto old = previous.row(c);
        std::copy(old.begin(), old.end(), dst.begin());
        continue;
      }
      for (double& x : dst) x /= static_cast<double>(counts[c]);
    }
  };
  recompute();

  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    double far = 0.0;
    std::size_t who = points.rows();
    for (std::size_t i = 0; i < points.rows(); ++i) {
      const auto own = static_cast<std::size_t>(labels[i]);
      if (counts[own] < 2) continue;
      const double d = squared_distance(points.row(i), centroids.row(own));
      if (d > far) {
        far = d;
        who = i;
      }
    }
    if (who == points.rows()) continue;  // degenerate geometry: leave the cluster empty
    labels[who] = static_cast<int>(c);
    recompute();
  }
  return centroids;
}

}  // namespace detail

/// Lloyd's algorithm on the rows of `points` with k-means++ seeding.
///
/// Stops when an assignment step changes no label or after `max_iterations` updates.
/// Deterministic for fixed (points, k, seed).
inline KMeansResult kmeans_detailed(const Matrix& points, std::size_t k, Seed seed, const KMeansOptions& opts = {}) {
  const std::size_t n = points.rows();
  if (k == 0 || k > n) throw ContractError("kmeans: need 1 <= k <= number of points");
  if (!all_finite(points)) throw NumericalError("kmeans: non-finite input");

  Rng rng(seed);
  KMeansResult out;
  out.centroids = detail::plus_plus_seeds(points, k, rng);
  out.labels = detail::assign(points, out.centroids);
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    out.centroids = detail::update_centroids(points, out.labels, k, out.centroids);
    out.objective_history.push_back(detail::objective(points, out.centroids, out.labels));
    out.iterations = it;
    Labeling next = detail::assign(points, out.centroids);
    if (next == out.labels) {
      out.converged = true;
      break;
    }
    out.labels = std::move(next);
  }
  return out;
}

inline Labeling kmeans(const Matrix& points, std::size_t k, Seed seed) {
  return kmeans_detailed(points, k, seed).labels;
}

/// Number of distinct ids in a labeling.
inline std::size_t count_clusters(const Labeling& labels) {
  std::vector<int> ids(labels.begin(), labels.end());
  std::sort(ids.begin(), ids.end());
  return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

}  // namespace fedspectral
