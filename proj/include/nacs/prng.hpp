#pragma once

// Seeded RNG helpers. Every stochastic component takes an explicit seed or
// engine reference; nothing in the library reads clocks or global state.

#include <cmath>
#include <cstdint>
#include <random>

namespace nacs {

using Rng = std::mt19937_64;

// splitmix64 finalizer, used to derive independent stream seeds from
// (root seed, stream index) pairs without correlation between streams.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(seed, stream));
}

// Uniform in [0,1) with 53-bit resolution. Built from raw engine words, not
// std::uniform_real_distribution, so streams are identical across standard
// library implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform index in [0, n). Modulo bias is below n / 2^64, immaterial here.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n));
}

// Standard Gumbel(0,1) draw via inverse CDF. The uniform is clamped away
// from 0 and 1 so the double log stays finite.
inline double gumbel_noise(Rng& rng) {
  double u = uniform01(rng);
  if (u < 1e-300) u = 1e-300;
  if (u > 1.0 - 1e-16) u = 1.0 - 1e-16;
  return -std::log(-std::log(u));
}

// Standard normal via Box-Muller on pinned uniforms.
inline double normal(Rng& rng) {
  double u1 = uniform01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace nacs
