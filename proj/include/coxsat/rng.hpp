#pragma once

// Counter-derived random streams. Trial i of a run seeded with `master` always
// draws from the same stream, no matter which worker executes it or when.

#include <cstdint>
#include <random>

namespace coxsat {

using Engine = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for substream `index` of `master`.
inline constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

inline Engine substream(std::uint64_t master, std::uint64_t index) {
  return Engine(substream_seed(master, index));
}

}  // namespace coxsat
