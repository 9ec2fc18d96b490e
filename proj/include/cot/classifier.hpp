#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cot/tabular.hpp"

namespace cot {

struct ClassifierConfig {
  double learning_rate = 0.1;
  int epochs = 300;
  double l2 = 1e-4;
  double threshold = 0.5;
  bool include_sensitive_as_features = true;

  void validate() const;
};

nlohmann::json classifier_config_to_json(const ClassifierConfig& config);
ClassifierConfig classifier_config_from_json(const nlohmann::json& doc,
                                             ClassifierConfig defaults = {});

struct TrainedModel {
  std::vector<double> weights;
  double bias = 0.0;
  // Standardization of the model inputs (features, then sensitive columns in
  // schema order when included). Constant columns get sd = 1.
  std::vector<double> feature_means;
  std::vector<double> feature_sds;
  std::vector<std::string> sensitive_inputs;
  ClassifierConfig config;
  // Training objective before each update, plus the final value.
  std::vector<double> loss_history;
};

// Model inputs: feature columns followed by the sensitive columns (as 0/1) when
// requested, row-major.
std::vector<double> design_matrix(const Dataset& data, bool include_sensitive);

// Full-batch gradient descent on L2-regularized cross-entropy over
// standardized inputs, from zero weights. Deterministic; `seed` is accepted
// for interface stability and does not influence the result.
TrainedModel fit(const Dataset& train, const ClassifierConfig& config, std::uint64_t seed);

std::vector<double> predict_proba(const TrainedModel& model, const Dataset& data);

// sigmoid(w.x + b) >= threshold maps to 1.
Dataset::Binary predict(const TrainedModel& model, const Dataset& data);

// Contract for attaching other learners to the tuning and evaluation loop.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const Dataset& train, std::uint64_t seed) = 0;
  virtual Dataset::Binary predict(const Dataset& data) const = 0;
  virtual std::unique_ptr<Classifier> clone() const = 0;
};

class LogisticRegression final : public Classifier {
 public:
  explicit LogisticRegression(ClassifierConfig config = {}) : config_(config) {}

  void fit(const Dataset& train, std::uint64_t seed) override;
  Dataset::Binary predict(const Dataset& data) const override;
  std::unique_ptr<Classifier> clone() const override {
    return std::make_unique<LogisticRegression>(*this);
  }

  const TrainedModel& model() const;

 private:
  ClassifierConfig config_;
  std::optional<TrainedModel> model_;
};

}  // namespace cot
