// Counter-based random streams: every (seed, round) pair owns an independent
// stream, so rounds can run in any order or on any thread.

#pragma once

#include <cstdint>

namespace iqkd {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class RoundStream {
 public:
  RoundStream(std::uint64_t seed, std::uint64_t round) : key_(mix64(seed) ^ mix64(round * 0x9E3779B97F4A7C15ULL + 1)) {}

  /// The n-th 64-bit word of this stream.
  std::uint64_t word(std::uint64_t n) const { return mix64(key_ + (n + 1) * 0x9E3779B97F4A7C15ULL); }

  /// The n-th uniform double in [0, 1), 53 bits.
  double uniform(std::uint64_t n) const { return static_cast<double>(word(n) >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
};

}  // namespace iqkd
