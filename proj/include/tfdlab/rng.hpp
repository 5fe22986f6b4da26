#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace tfdlab {

// Counter-based random numbers: every draw is a pure function of
// (key, counter), so results do not depend on evaluation order or threads.

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(mix64(key) ^ mix64(counter + 0x632be59bd9b4e019ULL));
}

/// Child seed for realization `index` of an ensemble keyed by `master`.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return hash_combine(master ^ 0x5851f42d4c957f2dULL, index);
}

/// Uniform double in the open interval (0, 1).
constexpr double uniform_open(std::uint64_t key, std::uint64_t counter) noexcept {
  const std::uint64_t bits = hash_combine(key, counter) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw for stream position `counter` (Box-Muller on two
/// sub-counters).
inline double standard_normal(std::uint64_t key, std::uint64_t counter) noexcept {
  const double u1 = uniform_open(key, 2 * counter);
  const double u2 = uniform_open(key, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace tfdlab
