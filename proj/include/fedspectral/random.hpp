#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "fedspectral/matrix.hpp"

namespace fedspectral {

using Seed = std::uint64_t;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Stable, platform-independent child seed. Used for client, trial and stage seeds so that
/// no two consumers of one master seed share a random stream.
constexpr Seed derive_seed(Seed master, std::uint64_t stream) noexcept {
  return detail::splitmix64(detail::splitmix64(master) ^ detail::splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// FNV-1a; turns names (dataset stems, stage tags) into seed streams.
constexpr std::uint64_t stable_hash(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr Seed derive_seed(Seed master, std::string_view tag) noexcept {
  return derive_seed(master, stable_hash(tag));
}

using Rng = std::mt19937_64;

/// i.i.d. standard normal entries.
inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Seed seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = normal(rng);
  return m;
}

}  // namespace fedspectral
