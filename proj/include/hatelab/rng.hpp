#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hatelab {

// All seeded stages draw from mt19937_64 through uniform_index so that the
// sequence of sampled indices is identical across standard library
// implementations (std::uniform_int_distribution is not).
using Rng = std::mt19937_64;

// Uniform integer in [0, n) by rejection sampling on the raw 64-bit output.
// Requires n > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// FNV-1a, used to derive per-key seeds.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
  return seed ^ fnv1a64(key);
}

}  // namespace hatelab
