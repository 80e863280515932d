#ifndef GRBM_RNG_HPP
#define GRBM_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "grbm/common.hpp"

namespace grbm {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  return Rng(splitmix64(s));
}

// Independent deterministic stream derived from (seed, stream id).
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed + 0x632be59bd9b4e019ull * (stream + 1);
  return Rng(splitmix64(s));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double normal01(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

// k distinct indices from [0, n), in draw order.
inline std::vector<Index> sample_without_replacement(Index n, Index k,
                                                     Rng& rng) {
  require(k <= n, "sample_without_replacement: k must not exceed n");
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  std::vector<Index> out(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    const Index j = pick(rng);
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(j)]);
    out[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace grbm

#endif
