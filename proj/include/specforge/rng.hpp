#pragma once

#include <cstdint>
#include <string_view>

namespace specforge {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent child seed from a parent seed and a tag.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return mix64(mix64(seed) ^ (tag * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

/// FNV-1a, used to key RNG streams by scene id.
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Counter-based generator: draw i of stream (seed, stream) is a pure function
/// of (seed, stream, i). Streams never share state, so any partitioning of
/// work over streams gives the same numbers regardless of thread schedule.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept : key_(derive_seed(seed, stream)) {}

  constexpr std::uint64_t next_u64() noexcept { return mix64(key_ ^ mix64(++counter_)); }
  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). Slight modulo bias is irrelevant for the small n used here.
  constexpr std::uint64_t below(std::uint64_t n) noexcept { return next_u64() % n; }

  constexpr std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Poisson variate with the given mean. Inversion by sequential search for
/// mean <= 10, Hormann's PTRS transformed rejection above. Exact for both
/// branches; no normal approximation.
long long sample_poisson(CounterRng& rng, double mean);

}  // namespace specforge
