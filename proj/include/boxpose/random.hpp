#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace boxpose {

/// splitmix64 step. Used to derive independent per-item seeds from a master
/// seed so that batch results do not depend on processing order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master ^ (0x632be59bd9b4e019ULL * (index + 1));
  return splitmix64(state);
}

/// Uniform double in [0, 1). Maps engine output directly so results do not
/// depend on the standard library's distribution implementation.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

inline std::uint64_t bounded_index(std::mt19937_64& rng, std::uint64_t n) {
  return rng() % n;
}

/// Standard normal via Box-Muller, again implementation-independent.
inline double normal_sample(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform_unit(rng);  // (0, 1]
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace boxpose
