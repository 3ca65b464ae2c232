#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <vector>

#include "mdpkit/random.hpp"

using namespace mdpkit;

TEST_CASE("philox known-answer vectors") {
  // Reference vectors for the 10-round 4x32 configuration.
  const std::array<std::uint32_t, 4> zero =
      Philox4x32::block({0u, 0u, 0u, 0u}, {0u, 0u});
  CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du,
                                             0xbc57ac4cu, 0x9b00dbd8u});

  const std::array<std::uint32_t, 4> ones = Philox4x32::block(
      {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
      {0xffffffffu, 0xffffffffu});
  CHECK(ones == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu,
                                             0xa20bc7c6u, 0x6d5451fdu});

  const std::array<std::uint32_t, 4> pi_digits = Philox4x32::block(
      {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
      {0xa4093822u, 0x299f31d0u});
  CHECK(pi_digits == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu,
                                                  0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are deterministic and distinct") {
  Philox4x32 a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool distinct_stream = false;
  bool distinct_seed = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u32();
    CHECK(x == b.next_u32());
    distinct_stream |= (x != c.next_u32());
    distinct_seed |= (x != d.next_u32());
  }
  CHECK(distinct_stream);
  CHECK(distinct_seed);
}

TEST_CASE("uniform doubles live in [0,1)") {
  Philox4x32 rng(1, 0);
  double lo = 1.0, hi = 0.0, mean = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    mean += u;
  }
  mean /= n;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("categorical sampling matches probabilities") {
  Philox4x32 rng(5, 1);
  Vecd p(3);
  p << 0.2, 0.5, 0.3;
  std::vector<int> counts(3, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) counts[sample_categorical(rng, p)]++;
  for (int k = 0; k < 3; ++k) {
    CHECK(double(counts[k]) / n == doctest::Approx(p[k]).epsilon(0.02));
  }
}

TEST_CASE("categorical sampling never lands on zero-probability entries") {
  Philox4x32 rng(9, 2);
  Vecd p(4);
  p << 0.0, 0.5, 0.0, 0.5;
  for (int i = 0; i < 20000; ++i) {
    const Index k = sample_categorical(rng, p);
    CHECK((k == 1 || k == 3));
  }
}

TEST_CASE("flat dirichlet rows are distributions") {
  Philox4x32 rng(11, 0);
  for (int i = 0; i < 100; ++i) {
    const Vecd x = dirichlet_flat(rng, 6);
    CHECK(x.minCoeff() >= 0.0);
    CHECK(x.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}
