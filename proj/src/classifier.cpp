#include "cot/classifier.hpp"

#include <cmath>

#include "cot/error.hpp"
#include "cot/kernels.hpp"

namespace cot {

void ClassifierConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::kConfig, "learning_rate must be > 0");
  if (epochs < 1) throw Error(ErrorKind::kConfig, "epochs must be >= 1");
  if (!(l2 >= 0.0)) throw Error(ErrorKind::kConfig, "l2 must be >= 0");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorKind::kConfig, "threshold must lie in (0, 1)");
  }
}

nlohmann::json classifier_config_to_json(const ClassifierConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"l2", c.l2},
          {"threshold", c.threshold},
          {"include_sensitive_as_features", c.include_sensitive_as_features}};
}

ClassifierConfig classifier_config_from_json(const nlohmann::json& doc, ClassifierConfig c) {
  try {
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.epochs = doc.value("epochs", c.epochs);
    c.l2 = doc.value("l2", c.l2);
    c.threshold = doc.value("threshold", c.threshold);
    c.include_sensitive_as_features =
        doc.value("include_sensitive_as_features", c.include_sensitive_as_features);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed classifier config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<double> design_matrix(const Dataset& data, bool include_sensitive) {
  const std::size_t n = data.rows();
  const std::size_t d = data.feature_dim();
  const auto& attrs = data.schema().sensitive_attributes;
  const std::size_t width = d + (include_sensitive ? attrs.size() : 0);
  std::vector<double> x(n * width);
  for (std::size_t r = 0; r < n; ++r) {
    auto src = data.row(r);
    std::copy(src.begin(), src.end(), x.begin() + static_cast<std::ptrdiff_t>(r * width));
  }
  if (include_sensitive) {
    for (std::size_t s = 0; s < attrs.size(); ++s) {
      auto col = data.sensitive(attrs[s].column);
      for (std::size_t r = 0; r < n; ++r) x[r * width + d + s] = col[r];
    }
  }
  return x;
}

namespace {

void standardize_in_place(std::vector<double>& x, std::size_t cols,
                          const std::vector<double>& means, const std::vector<double>& sds) {
  const std::size_t n = x.size() / cols;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      double& v = x[r * cols + j];
      v = (v - means[j]) / sds[j];
    }
  }
}

std::vector<double> model_inputs(const TrainedModel& model, const Dataset& data) {
  const bool with_sensitive = model.config.include_sensitive_as_features;
  const std::size_t expected = model.weights.size();
  const std::size_t width =
      data.feature_dim() + (with_sensitive ? data.schema().sensitive_attributes.size() : 0);
  if (width != expected) {
    throw Error(ErrorKind::kShape, "model expects " + std::to_string(expected) +
                                       " inputs, dataset provides " + std::to_string(width));
  }
  if (with_sensitive && data.schema().sensitive_names() != model.sensitive_inputs) {
    throw Error(ErrorKind::kShape, "dataset sensitive columns differ from those the model was trained on");
  }
  auto x = design_matrix(data, with_sensitive);
  standardize_in_place(x, width, model.feature_means, model.feature_sds);
  return x;
}

}  // namespace

TrainedModel fit(const Dataset& train, const ClassifierConfig& config, std::uint64_t /*seed*/) {
  config.validate();
  const auto labels = train.labels();
  std::size_t positives = 0;
  for (auto y : labels) positives += y;
  if (positives == 0 || positives == labels.size()) {
    throw Error(ErrorKind::kTraining, "training set holds a single label class");
  }

  TrainedModel model;
  model.config = config;
  if (config.include_sensitive_as_features) model.sensitive_inputs = train.schema().sensitive_names();

  auto x = design_matrix(train, config.include_sensitive_as_features);
  const std::size_t n = train.rows();
  const std::size_t cols = x.size() / n;
  model.feature_means.assign(cols, 0.0);
  model.feature_sds.assign(cols, 1.0);
  for (std::size_t j = 0; j < cols; ++j) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += x[r * cols + j];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (x[r * cols + j] - mean) * (x[r * cols + j] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    model.feature_means[j] = mean;
    model.feature_sds[j] = sd > 1e-12 ? sd : 1.0;
  }
  standardize_in_place(x, cols, model.feature_means, model.feature_sds);

  const kernels::MatrixView view{x, n, cols};
  model.weights.assign(cols, 0.0);
  model.loss_history.reserve(static_cast<std::size_t>(config.epochs) + 1);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto lg = kernels::logistic_loss_gradient(view, labels, model.weights, model.bias, config.l2);
    model.loss_history.push_back(lg.loss);
    for (std::size_t j = 0; j < cols; ++j) model.weights[j] -= config.learning_rate * lg.grad_weights[j];
    model.bias -= config.learning_rate * lg.grad_bias;
  }
  model.loss_history.push_back(
      kernels::logistic_loss_gradient(view, labels, model.weights, model.bias, config.l2).loss);
  return model;
}

std::vector<double> predict_proba(const TrainedModel& model, const Dataset& data) {
  const auto x = model_inputs(model, data);
  const std::size_t cols = model.weights.size();
  std::vector<double> scores(data.rows());
  kernels::linear_scores({x, data.rows(), cols}, model.weights, model.bias, scores);
  for (double& s : scores) s = 1.0 / (1.0 + std::exp(-s));
  return scores;
}

Dataset::Binary predict(const TrainedModel& model, const Dataset& data) {
  const auto proba = predict_proba(model, data);
  Dataset::Binary out(proba.size());
  for (std::size_t i = 0; i < proba.size(); ++i) out[i] = proba[i] >= model.config.threshold ? 1 : 0;
  return out;
}

void LogisticRegression::fit(const Dataset& train, std::uint64_t seed) {
  model_ = cot::fit(train, config_, seed);
}

Dataset::Binary LogisticRegression::predict(const Dataset& data) const {
  return cot::predict(model(), data);
}

const TrainedModel& LogisticRegression::model() const {
  if (!model_) throw Error(ErrorKind::kTraining, "predict called before fit");
  return *model_;
}

}  // namespace cot
