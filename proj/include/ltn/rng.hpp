#pragma once

#include <cstdint>
#include <random>

// Portable seeded randomness. mt19937_64 output is pinned down by the C++
// standard; std::uniform_real_distribution is not, so doubles are built by
// hand from the top 53 bits. Identical seeds reproduce byte-identical
// streams on any conforming platform.

namespace ltn::rng {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Independent stream keyed by (seed, stream_id); used to make per-sample and
// per-trial draws order-independent under parallel execution.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(~stream_id)));
}

inline double uniform_double(std::mt19937_64& eng, double lo, double hi) {
  const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;  // [0,1)
  return lo + (hi - lo) * u;
}

// Fixed stream ids (arbitrary distinct constants).
inline constexpr std::uint64_t kModelStream = 0x4D4F44454Cull;   // model draw
inline constexpr std::uint64_t kSampleBase = 0x10000000ull;      // + k per sample
inline constexpr std::uint64_t kNoiseBase = 0x4E30000000ull;     // + k per sample
inline constexpr std::uint64_t kTrialBase = 0x5452490000ull;     // + trial index
inline constexpr std::uint64_t kPairStream = 0x5041495253ull;    // pair subsampling

}  // namespace ltn::rng
