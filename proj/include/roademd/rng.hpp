#pragma once

// Seedable randomness with explicit stream splitting. Distinct purposes
// (arrival times, demand locations, fleet initialization, test data) draw from
// independent mt19937_64 generators derived from one master seed via
// splitmix64, so adding draws to one stream never perturbs another. Raw bits
// are turned into doubles by hand because the standard <random> distributions
// are implementation-defined; results are reproducible for a given seed and
// standard library.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace roademd {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Generator for stream number `stream` under master seed `seed`.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t mixed = splitmix64(splitmix64(seed) ^ (0x100000001b3ull * (stream + 1)));
  return std::mt19937_64(mixed);
}

// Uniform draw from [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) { return (g() >> 11) * 0x1.0p-53; }

inline double uniform_in(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

inline double exponential(std::mt19937_64& g, double rate) {
  return -std::log1p(-uniform01(g)) / rate;
}

// Index drawn with probability proportional to weights[i]; weights need not
// be normalized but must be nonnegative with a positive sum.
inline std::size_t pick_weighted(std::mt19937_64& g, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double x = uniform01(g) * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (x < cum) return i;
  }
  return weights.size() - 1;
}

}  // namespace roademd
