#pragma once

// Seed derivation and small sampling helpers. Every random stream in the
// library is keyed by (seed, stream indices) so results never depend on the
// order in which parallel work items run.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace crc {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a base seed with stream indices into an independent-looking seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  return Engine(derive_seed(seed, keys));
}

/// Uniform integer in [0, n) by rejection (portable, unlike std::uniform_int_distribution).
inline std::uint64_t uniform_index(Engine& rng, std::uint64_t n) {
  const std::uint64_t limit = Engine::max() - Engine::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

/// Uniform double in (0, 1).
inline double uniform_open(Engine& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline void shuffle(std::vector<std::size_t>& v, Engine& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

/// n draws with replacement from {0, ..., n-1}.
inline std::vector<std::size_t> resample_indices(std::size_t n, Engine& rng) {
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = uniform_index(rng, n);
  return idx;
}

}  // namespace crc
