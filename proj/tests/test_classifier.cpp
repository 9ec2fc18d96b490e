#include <gtest/gtest.h>

#include <algorithm>

#include "cot/classifier.hpp"
#include "cot/error.hpp"
#include "helpers.hpp"

using testing_support::make_dataset;
using testing_support::synth;

namespace {

cot::Dataset separable() {
  std::vector<double> x;
  std::vector<std::uint8_t> y, a;
  for (int i = -20; i <= 20; ++i) {
    if (i == 0) continue;
    x.push_back(i < 0 ? i - 1.0 : i + 1.0);
    y.push_back(i > 0);
    a.push_back(static_cast<std::uint8_t>(i & 1));
  }
  return make_dataset(a, y, x, 1);
}

double accuracy(const cot::Dataset::Binary& p, std::span<const std::uint8_t> y) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < p.size(); ++i) ok += p[i] == y[i];
  return static_cast<double>(ok) / static_cast<double>(p.size());
}

}  // namespace

TEST(Classifier, SeparableDataFitsExactly) {
  const auto d = separable();
  cot::ClassifierConfig cfg;
  cfg.include_sensitive_as_features = false;
  const auto m = cot::fit(d, cfg, 0);
  const auto p = cot::predict(m, d);
  EXPECT_EQ(accuracy(p, d.labels()), 1.0);
  EXPECT_EQ(p, cot::predict(m, d));
}

TEST(Classifier, SingleClassIsTrainingError) {
  const auto d = make_dataset({1, 0, 1}, {1, 1, 1}, {0.1, 0.2, 0.3}, 1);
  try {
    cot::fit(d, {}, 0);
    FAIL();
  } catch (const cot::Error& e) {
    EXPECT_EQ(e.kind(), cot::ErrorKind::kTraining);
  }
}

TEST(Classifier, BeatsMajorityRateOnSynthetic) {
  const auto d = synth(300, 200, 100, 400);
  const auto m = cot::fit(d, {}, 0);
  EXPECT_GT(accuracy(cot::predict(m, d), d.labels()), 0.6);
}

TEST(Classifier, LossHistoryDecreases) {
  const auto d = synth(300, 200, 100, 400);
  const auto m = cot::fit(d, {}, 0);
  ASSERT_EQ(m.loss_history.size(), 301u);
  for (std::size_t i = 1; i < m.loss_history.size(); ++i) {
    EXPECT_LE(m.loss_history[i], m.loss_history[i - 1] + 1e-15);
  }
}

TEST(Classifier, ZeroModelPredictsFavorable) {
  const auto d = synth(3, 2, 1, 4);
  cot::TrainedModel m;
  m.weights.assign(6, 0.0);
  m.feature_means.assign(6, 0.0);
  m.feature_sds.assign(6, 1.0);
  m.sensitive_inputs = {"a"};
  const auto p = cot::predict(m, d);
  EXPECT_TRUE(std::all_of(p.begin(), p.end(), [](auto v) { return v == 1; }));
}

TEST(Classifier, ShapeMismatchIsRejected) {
  const auto m = cot::fit(synth(30, 20, 10, 40), {}, 0);
  try {
    cot::predict(m, separable());
    FAIL();
  } catch (const cot::Error& e) {
    EXPECT_EQ(e.kind(), cot::ErrorKind::kShape);
  }
}

TEST(Classifier, InterfaceWrapperAndClone) {
  const auto d = synth(30, 20, 10, 40);
  cot::LogisticRegression lr;
  lr.fit(d, 0);
  auto copy = lr.clone();
  EXPECT_EQ(copy->predict(d), lr.predict(d));
  cot::LogisticRegression unfitted;
  EXPECT_THROW(unfitted.predict(d), cot::Error);
}

TEST(Classifier, ConfigJsonRoundTrip) {
  cot::ClassifierConfig c;
  c.epochs = 12;
  c.learning_rate = 0.05;
  const auto back = cot::classifier_config_from_json(cot::classifier_config_to_json(c));
  EXPECT_EQ(back.epochs, 12);
  EXPECT_EQ(back.learning_rate, 0.05);
  nlohmann::json bad{{"epochs", 0}};
  EXPECT_THROW(cot::classifier_config_from_json(bad), cot::Error);
}
