#include "cot/cot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "cot/correlation.hpp"
#include "cot/error.hpp"
#include "cot/random.hpp"

namespace cot {

std::string to_string(LossKind kind) {
  return kind == LossKind::kSingle ? "single" : "intersectional";
}

std::string to_string(TuneMethod method) { return method == TuneMethod::kPhi ? "phi" : "opt"; }

void OptConfig::validate() const {
  pso.validate();
  classifier.validate();
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error(ErrorKind::kConfig, "validation_fraction must lie in (0, 1)");
  }
}

nlohmann::json opt_config_to_json(const OptConfig& c) {
  return {{"pso", pso_config_to_json(c.pso)},
          {"validation_fraction", c.validation_fraction},
          {"classifier", classifier_config_to_json(c.classifier)},
          {"loss", to_string(c.loss_kind)},
          {"warm_start", c.warm_start}};
}

OptConfig opt_config_from_json(const nlohmann::json& doc, OptConfig c) {
  try {
    if (doc.contains("pso")) c.pso = pso_config_from_json(doc["pso"], c.pso);
    if (doc.contains("classifier")) {
      c.classifier = classifier_config_from_json(doc["classifier"], c.classifier);
    }
    c.validation_fraction = doc.value("validation_fraction", c.validation_fraction);
    c.warm_start = doc.value("warm_start", c.warm_start);
    if (doc.contains("loss")) {
      const auto loss = doc["loss"].get<std::string>();
      if (loss == "single") {
        c.loss_kind = LossKind::kSingle;
      } else if (loss == "intersectional") {
        c.loss_kind = LossKind::kIntersectional;
      } else {
        throw Error(ErrorKind::kConfig, "unknown loss '" + loss + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed optimization config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

std::optional<double> phi_if_defined(const Dataset& data, const std::string& attribute) {
  const auto table = contingency(data, attribute);
  if (!phi_defined(table)) return std::nullopt;
  return phi(table);
}

std::vector<std::size_t> candidate_rows(const Dataset& data, const std::string& attribute,
                                        std::uint8_t source) {
  const auto a = data.sensitive(attribute);
  const auto y = data.labels();
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    if (a[r] == source && y[r] == 1) rows.push_back(r);
  }
  return rows;
}

std::size_t count_for(double p, std::size_t candidates) {
  // Tolerates representation error in p (17/30 * 30 must give 17).
  const auto k = static_cast<std::size_t>(std::floor(p * static_cast<double>(candidates) + 1e-9));
  return std::min(k, candidates);
}

TuneResult from_stage(Dataset data, StageResult stage) {
  TuneResult out{std::move(data), stage.flipped_indices, stage.proportion_applied,
                 stage.phi_before, stage.phi_after, {}};
  out.stages.push_back(std::move(stage));
  return out;
}

}  // namespace

TuneResult apply_count(const Dataset& train, const std::string& attribute, std::size_t count,
                       TuneDirection direction, std::uint64_t seed) {
  const std::uint8_t source = direction == TuneDirection::kPrivilegedToUnprivileged ? 1 : 0;
  const auto candidates = candidate_rows(train, attribute, source);
  if (count > 0 && candidates.empty()) {
    throw Error(ErrorKind::kCandidate, "attribute '" + attribute +
                                           "' has no favorable-label rows in the source group");
  }
  if (count > candidates.size()) {
    throw Error(ErrorKind::kCandidate, "requested " + std::to_string(count) + " flips but only " +
                                           std::to_string(candidates.size()) + " candidates exist");
  }
  Rng rng(seed);
  const auto order = rng.permutation(candidates.size());

  StageResult stage;
  stage.attribute = attribute;
  stage.candidates = candidates.size();
  stage.proportion_applied =
      candidates.empty() ? 0.0
                         : static_cast<double>(count) / static_cast<double>(candidates.size());
  stage.phi_before = phi_if_defined(train, attribute);

  auto column = train.sensitive(attribute);
  Dataset::Binary tuned(column.begin(), column.end());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t row = candidates[order[i]];
    tuned[row] = static_cast<std::uint8_t>(1 - source);
    stage.flipped_indices.push_back(row);
  }
  std::sort(stage.flipped_indices.begin(), stage.flipped_indices.end());
  Dataset out = train.with_sensitive(attribute, std::move(tuned));
  stage.phi_after = phi_if_defined(out, attribute);
  return from_stage(std::move(out), std::move(stage));
}

TuneResult apply_proportion(const Dataset& train, const std::string& attribute, double p,
                            TuneDirection direction, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::kProportion, "proportion must lie in [0, 1]");
  }
  const std::uint8_t source = direction == TuneDirection::kPrivilegedToUnprivileged ? 1 : 0;
  const auto m = candidate_rows(train, attribute, source).size();
  if (p > 0.0 && m == 0) {
    throw Error(ErrorKind::kCandidate, "attribute '" + attribute +
                                           "' has no favorable-label rows in the source group");
  }
  auto result = apply_count(train, attribute, count_for(p, m), direction, seed);
  result.proportion_applied = p;
  result.stages.front().proportion_applied = p;
  return result;
}

TuneResult cot_phi(const Dataset& train, const std::string& attribute, std::uint64_t seed) {
  const auto table = contingency(train, attribute);
  const auto k = adjustment_count(table);
  return apply_count(train, attribute, static_cast<std::size_t>(k),
                     TuneDirection::kPrivilegedToUnprivileged, seed);
}

double loss_single(const MetricsBundle& m) {
  return (1.0 - m.f1) + (1.0 - m.accuracy) + std::fabs(m.spd) + std::fabs(m.aod) +
         std::fabs(m.eod);
}

double loss_intersectional(const MetricsBundle& m) {
  if (!m.ispd || !m.iaod || !m.ieod) {
    throw Error(ErrorKind::kConfig, "intersectional loss needs ISPD, IAOD and IEOD");
  }
  return (1.0 - m.f1) + (1.0 - m.accuracy) + std::fabs(*m.ispd) + std::fabs(*m.iaod) +
         std::fabs(*m.ieod);
}

// ---------------------------------------------------------------------------

struct OptObjective::State {
  std::string attribute;
  std::vector<std::string> loss_attributes;
  OptConfig config;
  std::uint64_t seed = 0;
  std::optional<Dataset> inner_train;
  std::optional<Dataset> validation;
  std::vector<std::uint32_t> validation_subgroups;
  std::size_t candidates = 0;
  double analytic = 0.0;

  mutable std::mutex mutex;
  mutable std::map<std::size_t, double> cache;

  double evaluate(std::size_t count) const {
    const auto tuned = apply_count(*inner_train, attribute, count,
                                   TuneDirection::kPrivilegedToUnprivileged, seed);
    const auto model = fit(tuned.dataset, config.classifier, seed);
    const auto pred = predict(model, *validation);
    auto bundle = cot::evaluate(pred, *validation, loss_attributes);
    if (config.loss_kind == LossKind::kSingle) return loss_single(bundle);
    if (!bundle.ispd) {
      const auto inter = intersectional_fairness(validation->labels(), pred, validation_subgroups);
      bundle.ispd = inter.ispd;
      bundle.iaod = inter.iaod;
      bundle.ieod = inter.ieod;
    }
    return loss_intersectional(bundle);
  }
};

OptObjective::OptObjective(const Dataset& train, std::string attribute,
                           std::vector<std::string> loss_attributes, const OptConfig& config,
                           std::uint64_t seed)
    : state_(std::make_unique<State>()) {
  config.validate();
  auto& s = *state_;
  s.attribute = std::move(attribute);
  s.loss_attributes = std::move(loss_attributes);
  s.config = config;
  s.seed = seed;
  if (s.loss_attributes.empty()) s.loss_attributes.push_back(s.attribute);
  if (!train.schema().has_sensitive(s.attribute)) {
    throw Error(ErrorKind::kSchema, "unknown sensitive attribute '" + s.attribute + "'");
  }

  auto [inner, validation] = split(train, 1.0 - config.validation_fraction, derive_seed(seed, 0x51));
  const auto labels = inner.labels();
  const auto positives = std::count(labels.begin(), labels.end(), std::uint8_t{1});
  if (positives == 0 || static_cast<std::size_t>(positives) == labels.size()) {
    throw Error(ErrorKind::kTraining, "inner training split holds a single label class");
  }
  s.validation_subgroups = subgroups(validation, s.loss_attributes);
  check_group_support(validation.labels(), validation.sensitive(s.loss_attributes.front()));
  if (s.config.loss_kind == LossKind::kIntersectional) {
    check_subgroup_support(validation.labels(), s.validation_subgroups);
  }
  s.candidates = candidate_rows(inner, s.attribute, 1).size();
  const auto table = contingency(inner, s.attribute);
  if (phi_defined(table) && table.n11 > 0) s.analytic = adjustment_proportion(table);
  s.inner_train.emplace(std::move(inner));
  s.validation.emplace(std::move(validation));
}

OptObjective::~OptObjective() = default;

double OptObjective::operator()(double p) const {
  const auto& s = *state_;
  const std::size_t count = count_for(std::clamp(p, 0.0, 1.0), s.candidates);
  {
    std::lock_guard lock(s.mutex);
    if (auto it = s.cache.find(count); it != s.cache.end()) return it->second;
  }
  const double loss = s.evaluate(count);
  std::lock_guard lock(s.mutex);
  s.cache.emplace(count, loss);
  return loss;
}

std::size_t OptObjective::candidate_count() const { return state_->candidates; }
double OptObjective::analytic_proportion() const { return state_->analytic; }
std::int64_t OptObjective::distinct_fits() const {
  std::lock_guard lock(state_->mutex);
  return static_cast<std::int64_t>(state_->cache.size());
}
const Dataset& OptObjective::inner_train() const { return *state_->inner_train; }
const Dataset& OptObjective::validation() const { return *state_->validation; }

namespace {

TuneResult opt_stage(const Dataset& train, const std::string& attribute,
                     std::vector<std::string> loss_attributes, const OptConfig& config,
                     std::uint64_t seed) {
  const OptObjective objective(train, attribute, std::move(loss_attributes), config, seed);
  std::vector<double> warm;
  if (config.warm_start) warm = {0.0, objective.analytic_proportion()};
  const auto pso = minimize_scalar([&](double p) { return objective(p); }, config.pso,
                                   derive_seed(seed, 0x50), warm);
  const double best_p = std::clamp(pso.x_best, 0.0, 1.0);

  auto result = apply_proportion(train, attribute, best_p,
                                 TuneDirection::kPrivilegedToUnprivileged, seed);
  OptDiagnostics diag;
  diag.best_proportion = best_p;
  diag.best_loss = pso.f_best;
  diag.evaluations = pso.evaluations;
  diag.distinct_fits = objective.distinct_fits();
  diag.best_history = pso.best_history;
  result.stages.front().search = std::move(diag);
  return result;
}

}  // namespace

TuneResult cot_opt(const Dataset& train, const std::string& attribute, const OptConfig& config,
                   std::uint64_t seed) {
  return opt_stage(train, attribute, {attribute}, config, seed);
}

TuneResult cot_multi(const Dataset& train, std::span<const std::string> attributes,
                     TuneMethod method, const OptConfig& config, std::uint64_t seed) {
  if (attributes.size() < 2) {
    throw Error(ErrorKind::kConfig, "multi-attribute tuning needs at least two attributes");
  }
  std::set<std::string> seen;
  for (const auto& a : attributes) {
    if (!train.schema().has_sensitive(a)) {
      throw Error(ErrorKind::kSchema, "unknown sensitive attribute '" + a + "'");
    }
    if (!seen.insert(a).second) {
      throw Error(ErrorKind::kConfig, "attribute '" + a + "' listed twice");
    }
  }
  OptConfig stage_config = config;
  stage_config.loss_kind = LossKind::kIntersectional;
  const std::vector<std::string> all(attributes.begin(), attributes.end());

  Dataset current = train;
  std::vector<StageResult> stages;
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    const auto stage_seed = derive_seed(seed, i);
    try {
      auto step = method == TuneMethod::kPhi
                      ? cot_phi(current, attributes[i], stage_seed)
                      : opt_stage(current, attributes[i], all, stage_config, stage_seed);
      current = std::move(step.dataset);
      stages.push_back(std::move(step.stages.front()));
    } catch (const Error& e) {
      throw e.with_context("tuning attribute '" + attributes[i] + "'");
    }
  }

  std::set<std::size_t> flipped;
  std::size_t candidates = 0;
  for (const auto& s : stages) {
    flipped.insert(s.flipped_indices.begin(), s.flipped_indices.end());
    candidates += s.candidates;
  }
  std::size_t total_flips = 0;
  for (const auto& s : stages) total_flips += s.flipped_indices.size();

  TuneResult out{std::move(current), {flipped.begin(), flipped.end()}, 0.0, {}, {}, std::move(stages)};
  out.proportion_applied =
      candidates == 0 ? 0.0 : static_cast<double>(total_flips) / static_cast<double>(candidates);
  out.phi_before = phi_if_defined(train, attributes.front());
  out.phi_after = phi_if_defined(out.dataset, attributes.front());
  return out;
}

nlohmann::json tune_result_summary(const TuneResult& result, TuneMethod method) {
  auto optional = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json doc;
  doc["method"] = to_string(method);
  doc["phi_before"] = optional(result.phi_before);
  doc["phi_after"] = optional(result.phi_after);
  doc["flips"] = result.flipped_indices.size();
  doc["proportion"] = result.proportion_applied;
  auto stages = nlohmann::json::array();
  for (const auto& s : result.stages) {
    nlohmann::json st;
    st["attribute"] = s.attribute;
    st["flips"] = s.flipped_indices.size();
    st["candidates"] = s.candidates;
    st["proportion"] = s.proportion_applied;
    st["phi_before"] = optional(s.phi_before);
    st["phi_after"] = optional(s.phi_after);
    if (s.search) {
      st["search"] = {{"best_proportion", s.search->best_proportion},
                      {"best_loss", s.search->best_loss},
                      {"evaluations", s.search->evaluations},
                      {"distinct_fits", s.search->distinct_fits}};
    }
    stages.push_back(std::move(st));
  }
  doc["stages"] = std::move(stages);
  return doc;
}

}  // namespace cot
