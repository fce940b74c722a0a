#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include "rydar/constants.hpp"

namespace rydar {

// Counter-based generation: every draw is a pure function of
// (seed, stream, index), so results do not depend on evaluation order
// and independent streams can be consumed in parallel.

inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

inline std::uint64_t random_word(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t index) {
  return mix64(hash_combine(hash_combine(seed, stream), index));
}

// Uniform in [0, 1) with 53-bit resolution.
inline double uniform01(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t index) {
  return static_cast<double>(random_word(seed, stream, index) >> 11) *
         0x1.0p-53;
}

namespace detail {

// Uniform in (0, 1]; safe as a log argument.
inline double word_to_positive_unit(std::uint64_t w) {
  return static_cast<double>((w >> 11) + 1) * 0x1.0p-53;
}

}  // namespace detail

// Standard normal via Box-Muller.
inline double gaussian(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t index) {
  const std::uint64_t base = hash_combine(hash_combine(seed, stream), index);
  const double u1 =
      detail::word_to_positive_unit(mix64(base ^ 0x5851f42d4c957f2dull));
  const double u2 =
      detail::word_to_positive_unit(mix64(base ^ 0x14057b7ef767814full));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Two independent standard normals as one complex draw.
inline std::complex<double> complex_gaussian(std::uint64_t seed,
                                             std::uint64_t stream,
                                             std::uint64_t index) {
  const std::uint64_t base = hash_combine(hash_combine(seed, stream), index);
  const double u1 =
      detail::word_to_positive_unit(mix64(base ^ 0x5851f42d4c957f2dull));
  const double u2 =
      detail::word_to_positive_unit(mix64(base ^ 0x14057b7ef767814full));
  const double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(two_pi * u2), r * std::sin(two_pi * u2)};
}

}  // namespace rydar
