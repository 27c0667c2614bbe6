#pragma once

#include <cstdint>
#include <random>

namespace netobj {

/// splitmix64 step; used to derive independent RNG streams from a master
/// seed so that permutation iteration m always sees the same stream no
/// matter which worker thread runs it.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministic 64-bit child seed for (seed, stream_id).
inline std::uint64_t splitmix_seed(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ (stream_id * 0xD2B74407B1CE6E93ULL + 0x9E3779B97F4A7C15ULL);
  return splitmix64(s);
}

/// Deterministic stream derivation: (seed, stream_id) -> mt19937_64.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t s = splitmix_seed(seed, stream_id);
  std::uint64_t b = splitmix64(s);
  std::uint64_t c = splitmix64(s);
  return std::mt19937_64(b ^ (c << 1));
}

}  // namespace netobj
