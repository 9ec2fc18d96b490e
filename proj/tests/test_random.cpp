#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "cot/random.hpp"

TEST(Rng, SameSeedSameStream) {
  cot::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(Rng, UniformInUnitInterval) {
  cot::Rng r(1);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(Rng, NormalMoments) {
  cot::Rng r(2);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  cot::Rng r(3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, PermutationIsAPermutation) {
  cot::Rng r(4);
  auto p = r.permutation(500);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], i);
  EXPECT_TRUE(cot::Rng(5).permutation(0).empty());
}

TEST(Rng, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 100; ++s) seeds.insert(cot::derive_seed(7, s));
  EXPECT_EQ(seeds.size(), 100u);
  EXPECT_EQ(cot::derive_seed(7, 3), cot::derive_seed(7, 3));
  EXPECT_NE(cot::derive_seed(7, 3), cot::derive_seed(8, 3));
}
