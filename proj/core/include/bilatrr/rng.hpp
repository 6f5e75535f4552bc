#pragma once

#include <cstdint>
#include <random>

namespace bilatrr {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Key for an independent substream, derived from a base seed and a
/// sequence of indices (cell, replication, ...).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Engine used for all simulation streams. mt19937_64 is specified bit-exactly
/// by the standard, so streams agree across platforms.
using Engine = std::mt19937_64;

Engine make_engine(std::uint64_t key);

/// Binomial(n, p) draw with a platform-independent algorithm.
std::int64_t sample_binomial(Engine& rng, std::int64_t n, double p);

/// Uniform draw on [lo, hi) with a platform-independent mapping.
double sample_uniform(Engine& rng, double lo, double hi);

}  // namespace bilatrr
