#pragma once

#include <cmath>
#include <cstdint>

// Counter-based deterministic random numbers. Every draw is a pure function
// of a key tuple, so ensembles can be generated out of order, in parallel,
// and reproduced bit-exactly from the key alone.

namespace ftc {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a,
                                     std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  return mix64(h ^ c);
}

// Uniform in (0, 1]; the +1 keeps log() finite.
constexpr double unit_double(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

inline double counter_uniform(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b, std::uint64_t c) {
  return unit_double(counter_hash(seed, a, b, c));
}

// Standard normal via Box-Muller; streams 2c and 2c+1 feed one draw.
inline double counter_normal(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b, std::uint64_t c) {
  const double u1 = counter_uniform(seed, a, b, 2 * c);
  const double u2 = counter_uniform(seed, a, b, 2 * c + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Unbiased-enough index draw in [0, n) via 128-bit multiply-shift.
inline std::size_t counter_index(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b, std::uint64_t c,
                                 std::size_t n) {
  const std::uint64_t h = counter_hash(seed, a, b, c);
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(h) * n) >> 64);
}

}  // namespace ftc
