#pragma once

#include <cstdint>
#include <random>

namespace storm {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; good avalanche, cheap, stable across platforms.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic per-cell stream: replications never share state and the
// mapping (master, a, b) -> seed is reproducible across runs and platforms.
inline Rng make_stream(std::uint64_t master, std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ (a + 0x100000001b3ULL));
  s = mix64(s ^ (b + 0xcbf29ce484222325ULL));
  return Rng(s);
}

}  // namespace storm
