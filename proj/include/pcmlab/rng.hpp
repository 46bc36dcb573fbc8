// Portable pseudo-random numbers: xoshiro256** seeded through SplitMix64.
// Both algorithms use their published constants, so every stream is
// bit-identical across compilers and platforms. No std:: distributions are
// used because their output is implementation-defined.
#pragma once

#include <array>
#include <cstdint>

namespace pcmlab {

/// Advances `state` by the golden-ratio increment and returns the mixed value.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Stream key for sub-stream `index` of `master_seed`.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1]; safe as a logarithm argument.
  double uniform_pos() noexcept { return 1.0 - uniform(); }
  bool bernoulli(double p) noexcept { return uniform() < p; }
  /// Standard normal via Box-Muller (one value per call, the pair's twin is cached).
  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace pcmlab
