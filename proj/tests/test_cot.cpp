#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "cot/correlation.hpp"
#include "cot/cot.hpp"
#include "cot/error.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using testing_support::synth;

namespace {

const auto P2U = cot::TuneDirection::kPrivilegedToUnprivileged;

cot::OptConfig small_opt() {
  cot::OptConfig c;
  c.pso.particles = 4;
  c.pso.iterations = 3;
  c.classifier.epochs = 60;
  return c;
}

std::vector<double> column(const cot::Dataset& d, std::size_t c) {
  std::vector<double> v(d.rows());
  for (std::size_t r = 0; r < d.rows(); ++r) v[r] = d.feature(r, c);
  return v;
}

std::vector<double> labels(const cot::Dataset& d) {
  return std::vector<double>(d.labels().begin(), d.labels().end());
}

void expect_only_sensitive_changed(const cot::Dataset& before, const cot::Dataset& after) {
  EXPECT_TRUE(std::equal(before.features().begin(), before.features().end(),
                         after.features().begin(), after.features().end()));
  EXPECT_TRUE(std::equal(before.labels().begin(), before.labels().end(), after.labels().begin(),
                         after.labels().end()));
  for (std::size_t c = 0; c < before.feature_dim(); ++c) {
    EXPECT_EQ(oracle::pearson(column(before, c), labels(before)),
              oracle::pearson(column(after, c), labels(after)));
  }
}

}  // namespace

TEST(ApplyProportion, ZeroIsIdentity) {
  const auto d = synth(30, 20, 10, 40);
  const auto r = cot::apply_proportion(d, "a", 0.0, P2U, 1);
  EXPECT_TRUE(r.flipped_indices.empty());
  EXPECT_TRUE(r.dataset == d);
}

TEST(ApplyProportion, OneFlipsEveryCandidate) {
  const auto d = synth(30, 20, 10, 40);
  const auto r = cot::apply_proportion(d, "a", 1.0, P2U, 1);
  EXPECT_EQ(r.flipped_indices.size(), 30u);
  EXPECT_EQ(cot::contingency(r.dataset, "a").n11, 0);
}

TEST(ApplyProportion, SeventeenThirtieths) {
  const auto d = synth(30, 20, 10, 40);
  const auto r = cot::apply_proportion(d, "a", 17.0 / 30.0, P2U, 5);
  EXPECT_EQ(r.flipped_indices.size(), 17u);
  EXPECT_EQ(cot::contingency(r.dataset, "a"), (cot::ContingencyTable{13, 20, 27, 40}));
  expect_only_sensitive_changed(d, r.dataset);
  for (auto i : r.flipped_indices) {
    EXPECT_EQ(d.sensitive("a")[i], 1);
    EXPECT_EQ(d.labels()[i], 1);
    EXPECT_EQ(r.dataset.sensitive("a")[i], 0);
  }
}

TEST(ApplyProportion, FlipSetsAreNested) {
  const auto d = synth(300, 200, 100, 400);
  std::vector<std::size_t> prev;
  for (double p : {0.1, 0.25, 0.5, 0.9}) {
    const auto r = cot::apply_proportion(d, "a", p, P2U, 9);
    EXPECT_TRUE(std::includes(r.flipped_indices.begin(), r.flipped_indices.end(), prev.begin(),
                              prev.end()));
    prev = r.flipped_indices;
  }
}

TEST(ApplyProportion, ReverseDirection) {
  const auto d = synth(30, 20, 10, 40);
  const auto r = cot::apply_proportion(d, "a", 1.0, cot::TuneDirection::kUnprivilegedToPrivileged, 1);
  EXPECT_EQ(cot::contingency(r.dataset, "a"), (cot::ContingencyTable{40, 20, 0, 40}));
}

TEST(ApplyProportion, Errors) {
  const auto d = synth(30, 20, 10, 40);
  try {
    cot::apply_proportion(d, "a", 1.5, P2U, 1);
    FAIL();
  } catch (const cot::Error& e) {
    EXPECT_EQ(e.kind(), cot::ErrorKind::kProportion);
  }
  const auto none = synth(0, 20, 10, 40);
  try {
    cot::apply_proportion(none, "a", 0.5, P2U, 1);
    FAIL();
  } catch (const cot::Error& e) {
    EXPECT_EQ(e.kind(), cot::ErrorKind::kCandidate);
  }
  EXPECT_THROW(cot::apply_proportion(d, "zzz", 0.5, P2U, 1), cot::Error);
}

TEST(CotPhi, Examples) {
  const auto balanced = cot::cot_phi(synth(25, 25, 25, 25), "a", 1);
  EXPECT_TRUE(balanced.flipped_indices.empty());
  EXPECT_EQ(*balanced.phi_before, 0.0);
  EXPECT_EQ(*balanced.phi_after, 0.0);

  const auto d = synth(30, 20, 10, 40);
  const auto r = cot::cot_phi(d, "a", 1);
  EXPECT_EQ(r.flipped_indices.size(), 17u);
  EXPECT_LE(std::fabs(*r.phi_after), 0.01);
  EXPECT_NEAR(*r.phi_before, 0.40825, 1e-5);
  EXPECT_DOUBLE_EQ(r.proportion_applied, 17.0 / 30.0);
  expect_only_sensitive_changed(d, r.dataset);

  const auto neg = synth(10, 40, 30, 20);
  const auto n = cot::cot_phi(neg, "a", 1);
  EXPECT_TRUE(n.flipped_indices.empty());
  EXPECT_TRUE(n.dataset == neg);
}

TEST(CotPhi, UndefinedPhiIsRejected) {
  try {
    cot::cot_phi(synth(5, 5, 0, 0), "a", 1);
    FAIL();
  } catch (const cot::Error& e) {
    EXPECT_EQ(e.kind(), cot::ErrorKind::kUndefinedCorrelation);
  }
}

TEST(Loss, Examples) {
  cot::MetricsBundle m;
  m.f1 = 1;
  m.accuracy = 1;
  EXPECT_EQ(cot::loss_single(m), 0.0);
  m.f1 = 0.5;
  m.accuracy = 0.8;
  m.spd = 0.1;
  m.aod = 0.1;
  m.eod = 0.2;
  EXPECT_NEAR(cot::loss_single(m), 1.1, 1e-12);
  cot::MetricsBundle z;
  EXPECT_EQ(cot::loss_single(z), 2.0);

  cot::MetricsBundle i;
  i.f1 = 0.6;
  i.accuracy = 0.7;
  i.ispd = 0.2;
  i.iaod = 0.1;
  i.ieod = 0.1;
  EXPECT_NEAR(cot::loss_intersectional(i), 1.1, 1e-12);
  EXPECT_THROW(cot::loss_intersectional(m), cot::Error);
}

TEST(Loss, IntersectionalCollapsesForOneAttribute) {
  const std::vector<std::uint8_t> y{1, 1, 0, 0, 1, 1, 0, 0};
  const std::vector<std::uint8_t> yhat{1, 0, 0, 0, 1, 1, 1, 0};
  const std::vector<std::uint8_t> a{0, 0, 0, 0, 1, 1, 1, 1};
  auto m = cot::evaluate(y, yhat, {a});
  const std::vector<std::uint32_t> ids(a.begin(), a.end());
  const auto inter = cot::intersectional_fairness(y, yhat, ids);
  m.ispd = inter.ispd;
  m.iaod = inter.iaod;
  m.ieod = inter.ieod;
  EXPECT_EQ(cot::loss_intersectional(m), cot::loss_single(m));
}

TEST(OptObjective, CachesByFlipCount) {
  const auto d = synth(300, 200, 100, 400);
  const cot::OptObjective obj(d, "a", {"a"}, small_opt(), 3);
  const auto m = obj.candidate_count();
  ASSERT_GT(m, 0u);
  const double a = obj(0.5);
  const double b = obj(0.5 + 0.1 / static_cast<double>(m));  // same floor
  EXPECT_EQ(a, b);
  EXPECT_EQ(obj.distinct_fits(), 1);
  obj(0.0);
  EXPECT_EQ(obj.distinct_fits(), 2);
  EXPECT_EQ(obj.inner_train().rows() + obj.validation().rows(), d.rows());
}

TEST(CotOpt, NotWorseThanUntunedOnValidation) {
  const auto d = synth(300, 200, 100, 400, 0.0);
  const auto cfg = small_opt();
  const auto r = cot::cot_opt(d, "a", cfg, 4);
  ASSERT_TRUE(r.stages.front().search.has_value());
  const cot::OptObjective fresh(d, "a", {"a"}, cfg, 4);
  EXPECT_LE(r.stages.front().search->best_loss, fresh(0.0));
  EXPECT_LE(r.stages.front().search->best_loss, fresh(fresh.analytic_proportion()));
  EXPECT_EQ(r.flipped_indices.size(),
            static_cast<std::size_t>(std::floor(r.proportion_applied * 300 + 1e-9)));
  expect_only_sensitive_changed(d, r.dataset);
}

TEST(CotOpt, FairDataKeepsLossAtMostTheUntunedLoss) {
  const auto d = synth(250, 250, 250, 250);
  const auto cfg = small_opt();
  const auto r = cot::cot_opt(d, "a", cfg, 2);
  const cot::OptObjective fresh(d, "a", {"a"}, cfg, 2);
  EXPECT_LE(r.stages.front().search->best_loss, fresh(0.0) + 1e-12);
}

TEST(CotOpt, Deterministic) {
  const auto d = synth(300, 200, 100, 400);
  const auto a = cot::cot_opt(d, "a", small_opt(), 6);
  const auto b = cot::cot_opt(d, "a", small_opt(), 6);
  EXPECT_EQ(a.proportion_applied, b.proportion_applied);
  EXPECT_EQ(a.flipped_indices, b.flipped_indices);
}

TEST(CotMulti, PhiStagesReachTheirIntegerOptimum) {
  const auto base = synth(300, 200, 100, 400, 1.0, 3);
  const auto d = testing_support::with_second_attribute(base, 0.7, 0.3, 8);
  const std::vector<std::string> attrs{"a", "b"};
  const auto r = cot::cot_multi(d, attrs, cot::TuneMethod::kPhi, {}, 1);
  ASSERT_EQ(r.stages.size(), 2u);
  // Stage 1 acts on the original table of a; stage 2 on b after stage 1.
  const auto ta = cot::contingency(d, "a");
  const auto kb = oracle::best_k({ta.n11, ta.n10, ta.n01, ta.n00});
  EXPECT_EQ(r.stages[0].flipped_indices.size(), static_cast<std::size_t>(kb));
  const auto tb = cot::contingency(cot::cot_phi(d, "a", cot::derive_seed(1, 0)).dataset, "b");
  const auto kb2 = oracle::best_k({tb.n11, tb.n10, tb.n01, tb.n00});
  EXPECT_EQ(r.stages[1].flipped_indices.size(), static_cast<std::size_t>(kb2));
  const auto final_b = cot::contingency(r.dataset, "b");
  EXPECT_LE(std::fabs(cot::phi(final_b)),
            std::fabs(static_cast<double>(oracle::phi({tb.n11 - kb2, tb.n10, tb.n01 + kb2, tb.n00}))) + 1e-12);
  expect_only_sensitive_changed(d, r.dataset);
}

TEST(CotMulti, FairAttributesNeedNoFlips) {
  auto d = testing_support::with_second_attribute(synth(250, 250, 250, 250), 0.0, 0.0, 1);
  // b alternates within each label class, so its table is balanced too.
  cot::Dataset::Binary b(d.rows());
  std::size_t seen[2] = {0, 0};
  for (std::size_t r = 0; r < d.rows(); ++r) b[r] = seen[d.labels()[r]]++ % 2;
  d = d.with_sensitive("b", b);
  ASSERT_EQ(cot::phi(cot::contingency(d, "b")), 0.0);
  const std::vector<std::string> attrs{"a", "b"};
  const auto r = cot::cot_multi(d, attrs, cot::TuneMethod::kPhi, {}, 1);
  EXPECT_TRUE(r.flipped_indices.empty());
  EXPECT_TRUE(r.dataset == d);
}

TEST(CotMulti, OrderMayMatter) {
  const auto base = synth(300, 200, 100, 400, 1.0, 4);
  const auto d = testing_support::with_second_attribute(base, 0.8, 0.4, 2);
  const std::vector<std::string> ab{"a", "b"}, ba{"b", "a"};
  const auto r1 = cot::cot_multi(d, ab, cot::TuneMethod::kPhi, {}, 1);
  const auto r2 = cot::cot_multi(d, ba, cot::TuneMethod::kPhi, {}, 1);
  RecordProperty("flips_ab", std::to_string(r1.flipped_indices.size()));
  RecordProperty("flips_ba", std::to_string(r2.flipped_indices.size()));
  EXPECT_EQ(r1.stages[0].attribute, "a");
  EXPECT_EQ(r2.stages[0].attribute, "b");
}

TEST(CotMulti, OptUsesIntersectionalLoss) {
  const auto base = synth(300, 200, 100, 400, 1.0, 5);
  const auto d = testing_support::with_second_attribute(base, 0.7, 0.3, 3);
  const std::vector<std::string> attrs{"a", "b"};
  const auto r = cot::cot_multi(d, attrs, cot::TuneMethod::kOpt, small_opt(), 2);
  ASSERT_EQ(r.stages.size(), 2u);
  EXPECT_TRUE(r.stages[0].search.has_value());
  EXPECT_TRUE(r.stages[1].search.has_value());
  expect_only_sensitive_changed(d, r.dataset);
}

TEST(CotMulti, Preconditions) {
  const auto d = synth(30, 20, 10, 40);
  const std::vector<std::string> one{"a"}, unknown{"a", "q"};
  EXPECT_THROW(cot::cot_multi(d, one, cot::TuneMethod::kPhi, {}, 1), cot::Error);
  EXPECT_THROW(cot::cot_multi(d, unknown, cot::TuneMethod::kPhi, {}, 1), cot::Error);
}

TEST(TuneSummary, Fields) {
  const auto r = cot::cot_phi(synth(30, 20, 10, 40), "a", 1);
  const auto j = cot::tune_result_summary(r, cot::TuneMethod::kPhi);
  EXPECT_EQ(j["flips"], 17);
  EXPECT_EQ(j["method"], "phi");
  EXPECT_TRUE(j.contains("phi_before"));
  EXPECT_TRUE(j.contains("phi_after"));
  EXPECT_TRUE(j.contains("proportion"));
}
