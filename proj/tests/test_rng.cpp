#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "slump/rng.hpp"

using slump::RngStream;

// Published known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswerZero) {
  const auto out = RngStream::block(0, 0, 0);
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = RngStream::block(~0ull, ~0ull, ~0ull);
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  // counter words 243f6a88 85a308d3 13198a2e 03707344, key a4093822 299f31d0
  const auto out = RngStream::block(0x299f31d0a4093822ull, 0x0370734413198a2eull, 0x85a308d3243f6a88ull);
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(RngStream, SameKeySameSequence) {
  RngStream a(42, 3), b(42, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u32(), b.next_u32());
}

TEST(RngStream, StreamsDiffer) {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 256; ++i) {
    const auto x = a.next_u32();
    same_ab += x == b.next_u32();
    same_ac += x == c.next_u32();
  }
  EXPECT_LT(same_ab, 3);
  EXPECT_LT(same_ac, 3);
}

TEST(RngStream, UniformRangeAndMoments) {
  RngStream r(7, 0);
  double s = 0, sq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    sq += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 0.01);
  EXPECT_NEAR(sq / n - (s / n) * (s / n), 1.0 / 12.0, 0.005);
}

TEST(RngStream, NormalMoments) {
  RngStream r(11, 2);
  double s = 0, sq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    sq += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(RngStream, BelowIsInRangeAndCoversAll) {
  RngStream r(1, 1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_EQ(r.below(1), 0u);
}

TEST(RngStream, DeriveSeedDoesNotAdvance) {
  RngStream a(5, 0), b(5, 0);
  const auto s1 = a.derive_seed(0);
  EXPECT_EQ(s1, a.derive_seed(0));
  EXPECT_NE(s1, a.derive_seed(1));
  EXPECT_EQ(a.next_u32(), b.next_u32());
}

TEST(Permutation, IsAPermutationAndDeterministic) {
  for (std::size_t n : {0u, 1u, 2u, 17u, 255u}) {
    RngStream r1(9, n), r2(9, n);
    auto p = slump::permutation(n, r1);
    EXPECT_EQ(p, slump::permutation(n, r2));
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(p[i], i);
  }
}
