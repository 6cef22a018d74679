#pragma once

#include <cstddef>
#include <cstdint>

#include "skewfbm/mc/rng.hpp"

namespace skewfbm::mc {

/// Sample size and seeding shared by every Monte Carlo study.
struct McConfig {
  std::size_t paths = 1000;
  std::uint64_t seed = 7;
  unsigned workers = 1;

  /// Substream of path `index` for the study identified by `tag`.
  SeedSpec substream(std::uint64_t tag, std::size_t index) const { return {derive_seed(seed, tag), index}; }
};

/// Tags separating the substreams of different studies that share a seed.
namespace tags {
inline constexpr std::uint64_t fbm_paths = 1;
inline constexpr std::uint64_t local_time = 2;
inline constexpr std::uint64_t self_similarity_a = 3;
inline constexpr std::uint64_t self_similarity_b = 4;
inline constexpr std::uint64_t sde = 5;
inline constexpr std::uint64_t girsanov = 6;
inline constexpr std::uint64_t verify = 7;
inline constexpr std::uint64_t holder = 8;
inline constexpr std::uint64_t compactness = 9;
inline constexpr std::uint64_t cholesky_oracle = 10;
}  // namespace tags

}  // namespace skewfbm::mc
