#pragma once

#include <cstdint>
#include <random>

namespace mosum {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Engine for substream `stream` of a master seed. Each Monte Carlo replicate
// draws from its own substream, so results are independent of how replicates
// are scheduled across threads.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream + 0x517cc1b727220a95ULL)));
}

// Disjoint stream-id offsets for the different consumers of one master seed.
namespace stream_tag {
constexpr std::uint64_t threshold = 0x1000000000000000ULL;
constexpr std::uint64_t replicate = 0x2000000000000000ULL;
constexpr std::uint64_t comparator = 0x3000000000000000ULL;
}  // namespace stream_tag

}  // namespace mosum
