#include <gtest/gtest.h>

#include "cot/correlation.hpp"
#include "cot/error.hpp"
#include "cot/random.hpp"
#include "oracles.hpp"

using cot::ContingencyTable;

TEST(Contingency, CountsByEnumeration) {
  const std::vector<std::uint8_t> a{1, 1, 1, 1, 0, 0, 0, 0};
  const std::vector<std::uint8_t> y{1, 1, 0, 0, 1, 0, 0, 0};
  EXPECT_EQ(cot::contingency(a, y), (ContingencyTable{2, 2, 1, 3}));
  const std::vector<std::uint8_t> ones(5, 1);
  EXPECT_EQ(cot::contingency(ones, ones), (ContingencyTable{5, 0, 0, 0}));
}

TEST(Phi, Examples) {
  EXPECT_DOUBLE_EQ(cot::phi({25, 25, 25, 25}), 0.0);
  EXPECT_DOUBLE_EQ(cot::phi({50, 0, 0, 50}), 1.0);
  EXPECT_NEAR(cot::phi({30, 20, 10, 40}), 0.40825, 1e-5);
}

TEST(Phi, UndefinedWhenAMarginIsZero) {
  EXPECT_FALSE(cot::phi_defined({5, 0, 0, 0}));
  try {
    cot::phi({5, 5, 0, 0});
    FAIL();
  } catch (const cot::Error& e) {
    EXPECT_EQ(e.kind(), cot::ErrorKind::kUndefinedCorrelation);
  }
}

TEST(Phi, MatchesOracleAndStaysInRange) {
  cot::Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    const ContingencyTable t{static_cast<std::int64_t>(rng.below(500)),
                             static_cast<std::int64_t>(rng.below(500)),
                             static_cast<std::int64_t>(rng.below(500)),
                             static_cast<std::int64_t>(rng.below(500))};
    if (!cot::phi_defined(t)) continue;
    const double p = cot::phi(t);
    EXPECT_GE(p, -1.0);
    EXPECT_LE(p, 1.0);
    EXPECT_NEAR(p, static_cast<double>(oracle::phi({t.n11, t.n10, t.n01, t.n00})), 1e-12);
  }
}

TEST(AdjustmentCount, Examples) {
  EXPECT_EQ(cot::adjustment_count({25, 25, 25, 25}), 0);
  EXPECT_EQ(cot::adjustment_count({30, 20, 10, 40}), 17);
  EXPECT_EQ(cot::adjustment_count({50, 0, 0, 50}), 49);
  EXPECT_EQ(cot::adjustment_count({10, 40, 30, 20}), 0);  // phi < 0
  EXPECT_LT(std::fabs(cot::phi(ContingencyTable{30, 20, 10, 40}.after_flips(17))), 0.01);
}

TEST(AdjustmentCount, MatchesBruteForceOnRandomLargeTables) {
  cot::Rng rng(10);
  for (int i = 0; i < 300; ++i) {
    const ContingencyTable t{1 + static_cast<std::int64_t>(rng.below(3000)),
                             static_cast<std::int64_t>(rng.below(3000)),
                             static_cast<std::int64_t>(rng.below(3000)),
                             1 + static_cast<std::int64_t>(rng.below(3000))};
    if (!cot::phi_defined(t)) continue;
    EXPECT_EQ(cot::adjustment_count(t), oracle::best_k({t.n11, t.n10, t.n01, t.n00}))
        << t.n11 << "," << t.n10 << "," << t.n01 << "," << t.n00;
  }
}

TEST(AdjustmentProportion, Examples) {
  EXPECT_DOUBLE_EQ(cot::adjustment_proportion({25, 25, 25, 25}), 0.0);
  EXPECT_DOUBLE_EQ(cot::adjustment_proportion({30, 20, 10, 40}), 17.0 / 30.0);
  EXPECT_DOUBLE_EQ(cot::adjustment_proportion({10, 10, 10, 10}), 0.0);
  EXPECT_DOUBLE_EQ(cot::adjustment_proportion({20, 20, 20, 20}), 0.0);
  try {
    cot::adjustment_proportion({0, 5, 5, 5});
    FAIL();
  } catch (const cot::Error& e) {
    EXPECT_EQ(e.kind(), cot::ErrorKind::kProportion);
  }
}
