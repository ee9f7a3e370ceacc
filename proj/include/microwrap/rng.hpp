#pragma once

#include <cstdint>

namespace microwrap {

/// PCG32 (XSH-RR variant, 64-bit state, 32-bit output).
///
/// Seeding follows the reference pcg32_srandom_r so streams are identical to
/// the published implementation: seed picks the starting state, stream picks
/// the increment.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0) { reseed(seed, stream); }

  void reseed(std::uint64_t seed, std::uint64_t stream = 0) {
    state_ = 0;
    inc_ = (stream << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  /// Uniform in [0, 1) with 32 bits of resolution.
  double next_uniform() { return next_u32() * 0x1.0p-32; }

  /// Uniform integer in [0, bound); bound must be positive. Rejection
  /// sampling keeps the result unbiased.
  std::uint32_t next_below(std::uint32_t bound) {
    const std::uint32_t threshold = (-bound) % bound;
    for (;;) {
      const std::uint32_t r = next_u32();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1u;
    if (span > 0xffffffffULL) {
      const std::uint64_t r = (static_cast<std::uint64_t>(next_u32()) << 32u) | next_u32();
      return lo + static_cast<std::int64_t>(r % span);
    }
    return lo + next_below(static_cast<std::uint32_t>(span));
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

}  // namespace microwrap
