#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "mdpkit/types.hpp"

namespace mdpkit {

/**
 * Philox4x32-10 counter-based random number generator.
 *
 * A stream is identified by (seed, stream): the seed forms the cipher key
 * and the stream id occupies the low two counter words, so streams drawn
 * from the same seed are guaranteed disjoint. Jumping to the n-th draw is
 * O(1), and sampling many streams in parallel is reproducible regardless
 * of scheduling.
 *
 * Known-answer vectors from the reference implementation are covered by
 * the unit tests.
 */
class Philox4x32 {
 public:
  Philox4x32() : Philox4x32(0, 0) {}

  Philox4x32(std::uint64_t seed, std::uint64_t stream) {
    key_ = {static_cast<std::uint32_t>(seed),
            static_cast<std::uint32_t>(seed >> 32)};
    ctr_ = {static_cast<std::uint32_t>(stream),
            static_cast<std::uint32_t>(stream >> 32), 0u, 0u};
  }

  using result_type = std::uint32_t;
  static constexpr result_type min() { return 0u; }
  static constexpr result_type max() { return 0xffffffffu; }

  std::uint32_t operator()() { return next_u32(); }

  std::uint32_t next_u32() {
    if (buf_pos_ == 4) {
      buf_ = block(ctr_, key_);
      advance_counter();
      buf_pos_ = 0;
    }
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [lo, hi] inclusive.
  std::uint64_t uniform_index(std::uint64_t lo, std::uint64_t hi) {
    return lo + next_u64() % (hi - lo + 1);
  }

  /// One keyed block; exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
      ctr = round(ctr, key);
      if (r < 9) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
    }
    return ctr;
  }

 private:
  static std::array<std::uint32_t, 4> round(
      const std::array<std::uint32_t, 4>& ctr,
      const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }

  void advance_counter() {
    if (++ctr_[2] == 0) ++ctr_[3];
  }

  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
};

/**
 * Inverse-CDF draw from a categorical distribution given as a probability
 * vector. The last positive-probability index absorbs any leftover mass
 * from rounding.
 */
template <typename Derived>
Index sample_categorical(Philox4x32& rng,
                         const Eigen::MatrixBase<Derived>& probs) {
  const double u = rng.next_double();
  double cum = 0.0;
  Index last_positive = 0;
  for (Index i = 0; i < probs.size(); ++i) {
    const double p = static_cast<double>(probs(i));
    if (p > 0.0) last_positive = i;
    cum += p;
    if (u < cum) return i;
  }
  return last_positive;
}

/// Flat Dirichlet draw (normalized unit exponentials).
inline Vecd dirichlet_flat(Philox4x32& rng, Index n) {
  Vecd x(n);
  for (Index i = 0; i < n; ++i) {
    x[i] = -std::log(1.0 - rng.next_double());
  }
  x /= x.sum();
  return x;
}

}  // namespace mdpkit
