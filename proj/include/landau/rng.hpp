#pragma once

#include <cstdint>
#include <limits>

namespace landau {

/// Counter-based generator: output n is a SplitMix64 finalizer applied to
/// (key + n·golden). Streams are split by hashing a stream id into a new key,
/// so independent seeds for J repeated runs are `Rng(seed).split(j)`.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)), seed_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + kGolden * ++counter_); }

  Rng split(std::uint64_t stream) const {
    Rng child(seed_);
    child.key_ = mix(key_ ^ mix(stream + kGolden));
    return child;
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace landau
