#pragma once

#include <cstdint>

namespace spgg {

// Counter-based random draws. Each value is a pure function of
// (seed, stream, counter), so per-site draws inside parallel loops do not
// depend on thread count or iteration order.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_draw(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t counter) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double uniform01(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t counter) {
  return static_cast<double>(hash_draw(seed, stream, counter) >> 11) * 0x1.0p-53;
}

// Stream identifiers, one per consumer of randomness.
namespace stream {
inline constexpr std::uint64_t kInitBernoulli = 0x11;
inline constexpr std::uint64_t kActionSample = 0x22;
inline constexpr std::uint64_t kFermiNeighbor = 0x33;
inline constexpr std::uint64_t kFermiAdopt = 0x44;
inline constexpr std::uint64_t kQExplore = 0x55;
inline constexpr std::uint64_t kQAction = 0x66;
inline constexpr std::uint64_t kFermiAsyncSite = 0x77;
}  // namespace stream

/// Counter for a (step, site) pair.
constexpr std::uint64_t step_site(std::uint64_t step, std::uint64_t site) {
  return (step << 32) ^ site;
}

}  // namespace spgg
