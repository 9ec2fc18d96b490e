#include <gtest/gtest.h>

#include <cmath>

#include "cot/error.hpp"
#include "cot/random.hpp"
#include "cot/stats.hpp"
#include "oracles.hpp"

TEST(MannWhitney, Examples) {
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, y{11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  const auto r = cot::mann_whitney_u(x, y);
  EXPECT_EQ(r.u, 0.0);
  EXPECT_LT(r.p, 0.001);
  EXPECT_GE(cot::mann_whitney_u(x, x).p, 0.95);
  const std::vector<double> c(6, 2.0);
  EXPECT_EQ(cot::mann_whitney_u(c, c).p, 1.0);
  EXPECT_EQ(cot::cliffs_delta(c, c), 0.0);
}

TEST(MannWhitney, SymmetricAndTranslationInvariant) {
  cot::Rng r(3);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(1 + r.below(15)), y(1 + r.below(15));
    for (auto& v : x) v = std::round(r.normal() * 3);
    for (auto& v : y) v = std::round(r.normal() * 3 + 1);
    const auto a = cot::mann_whitney_u(x, y), b = cot::mann_whitney_u(y, x);
    EXPECT_NEAR(a.p, b.p, 1e-12);
    EXPECT_NEAR(a.u + b.u, static_cast<double>(x.size() * y.size()), 1e-9);
    auto xs = x, ys = y;
    for (auto& v : xs) v += 100;
    for (auto& v : ys) v += 100;
    EXPECT_EQ(cot::mann_whitney_u(xs, ys).u, a.u);
    EXPECT_EQ(cot::mann_whitney_u(xs, ys).p, a.p);
    EXPECT_EQ(cot::cliffs_delta(xs, ys), cot::cliffs_delta(x, y));
  }
}

TEST(CliffsDelta, Examples) {
  EXPECT_NEAR(cot::cliffs_delta(std::vector<double>{1, 2, 3}, std::vector<double>{2, 2, 4}), -1.0 / 3.0, 1e-15);
  EXPECT_EQ(cot::cliffs_delta(std::vector<double>{5, 6}, std::vector<double>{1, 2, 3}), 1.0);
  const std::vector<double> x{1, 4, 2, 8};
  EXPECT_EQ(cot::cliffs_delta(x, x), 0.0);
}

TEST(CliffsDelta, AntisymmetricAndMatchesPairCounting) {
  cot::Rng r(4);
  for (int i = 0; i < 300; ++i) {
    std::vector<double> x(1 + r.below(12)), y(1 + r.below(12));
    for (auto& v : x) v = std::round(r.normal() * 2);
    for (auto& v : y) v = std::round(r.normal() * 2);
    const double d = cot::cliffs_delta(x, y);
    EXPECT_EQ(d, -cot::cliffs_delta(y, x));
    EXPECT_LE(std::fabs(d), 1.0);
    EXPECT_EQ(d, oracle::cliffs_delta(x, y));
    EXPECT_EQ(cot::mann_whitney_u(x, y).u, oracle::mann_whitney_u(x, y));
  }
}

TEST(Stats, EmptyInputIsSizeError) {
  const std::vector<double> e, x{1.0};
  try {
    cot::cliffs_delta(e, x);
    FAIL();
  } catch (const cot::Error& err) {
    EXPECT_EQ(err.kind(), cot::ErrorKind::kSize);
  }
  EXPECT_THROW(cot::mann_whitney_u(x, e), cot::Error);
}

TEST(Stats, LargeEffectThreshold) {
  EXPECT_TRUE(cot::is_large_effect(0.428));
  EXPECT_TRUE(cot::is_large_effect(-0.428));
  EXPECT_FALSE(cot::is_large_effect(std::nextafter(0.428, 0.0)));
  EXPECT_FALSE(cot::is_large_effect(std::nextafter(-0.428, 0.0)));
}

TEST(Stats, CompareFlagsAndJson) {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, y{11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  const auto t = cot::compare(x, y);
  EXPECT_TRUE(t.significant);
  EXPECT_TRUE(t.large_effect);
  EXPECT_EQ(t.delta, -1.0);
  const auto back = cot::test_result_from_json(cot::test_result_to_json(t));
  EXPECT_EQ(back.p_value, t.p_value);
  EXPECT_EQ(back.large_effect, t.large_effect);
}
