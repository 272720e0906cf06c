#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "fedspectral/errors.hpp"
#include "fedspectral/kmeans.hpp"

namespace fedspectral {

/// Pair-counting similarity of an aggregated labeling to a reference labeling.
///
/// Counts ordered pairs (i, j), i == j included, that the reference puts in one cluster and
/// the aggregated labeling separates, and returns 1 - count / N². Merging reference clusters
/// costs nothing; splitting them does, so the arguments are not interchangeable.
///
/// Computed from the contingency table: for a reference cluster of size n_g whose members fall
/// into aggregated clusters of sizes n_ga, the separated ordered pairs are n_g² - Σ_a n_ga².
inline double cluster_similarity(const Labeling& global_labels, const Labeling& aggregated_labels) {
  if (global_labels.size() != aggregated_labels.size())
    throw ContractError("cluster_similarity: labelings have different lengths (" +
                        std::to_string(global_labels.size()) + " vs " + std::to_string(aggregated_labels.size()) + ")");
  const std::size_t n = global_labels.size();
  if (n == 0) throw ContractError("cluster_similarity: empty labeling");

  auto key = [](int g, int a) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(g)) << 32) | static_cast<std::uint32_t>(a);
  };
  std::unordered_map<int, std::uint64_t> global_sizes;
  std::unordered_map<std::uint64_t, std::uint64_t> joint_sizes;
  for (std::size_t i = 0; i < n; ++i) {
    ++global_sizes[global_labels[i]];
    ++joint_sizes[key(global_labels[i], aggregated_labels[i])];
  }
  std::uint64_t together = 0;
  for (const auto& [g, size] : global_sizes) together += size * size;
  std::uint64_t kept = 0;
  for (const auto& [k, size] : joint_sizes) kept += size * size;
  const double mismatch = static_cast<double>(together - kept);
  return 1.0 - mismatch / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace fedspectral
