#pragma once

// Correlation tuning: move favorable-label rows between sensitive groups so
// the Phi-coefficient between a sensitive attribute and the label reaches a
// target (zero for the analytic variant, a loss-optimal value for the
// searched variant). Only the sensitive column changes.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cot/classifier.hpp"
#include "cot/metrics.hpp"
#include "cot/optimizer.hpp"
#include "cot/tabular.hpp"

namespace cot {

enum class TuneDirection { kPrivilegedToUnprivileged, kUnprivilegedToPrivileged };
enum class LossKind { kSingle, kIntersectional };
enum class TuneMethod { kPhi, kOpt };

std::string to_string(LossKind kind);
std::string to_string(TuneMethod method);

struct OptConfig {
  PsoConfig pso;
  double validation_fraction = 0.2;
  ClassifierConfig classifier;
  LossKind loss_kind = LossKind::kSingle;
  // Start two particles at p = 0 and at the analytic proportion, so the
  // searched proportion is never worse than either on the validation split.
  bool warm_start = true;

  void validate() const;
};

nlohmann::json opt_config_to_json(const OptConfig& config);
OptConfig opt_config_from_json(const nlohmann::json& doc, OptConfig defaults = {});

struct OptDiagnostics {
  double best_proportion = 0.0;
  double best_loss = 0.0;
  std::int64_t evaluations = 0;
  std::int64_t distinct_fits = 0;
  std::vector<double> best_history;
};

// One attribute's tuning step.
struct StageResult {
  std::string attribute;
  std::vector<std::size_t> flipped_indices;  // sorted row positions
  std::size_t candidates = 0;
  double proportion_applied = 0.0;
  std::optional<double> phi_before;  // empty where phi is undefined
  std::optional<double> phi_after;
  std::optional<OptDiagnostics> search;
};

struct TuneResult {
  Dataset dataset;
  // Single attribute: the stage's values. Several attributes: flipped_indices
  // is the sorted union over stages, proportion_applied is total flips over
  // total candidates, and the phi values refer to the first attribute.
  std::vector<std::size_t> flipped_indices;
  double proportion_applied = 0.0;
  std::optional<double> phi_before;
  std::optional<double> phi_after;
  std::vector<StageResult> stages;
};

nlohmann::json tune_result_summary(const TuneResult& result, TuneMethod method);

// Flips floor(p * |candidates|) candidates, where candidates are the rows in
// the source group with y = 1. The order is one seeded permutation of the
// candidate set, so the flipped set for p is a prefix of that for any p' > p.
TuneResult apply_proportion(const Dataset& train, const std::string& attribute, double p,
                            TuneDirection direction, std::uint64_t seed);

// Same as apply_proportion with an explicit count.
TuneResult apply_count(const Dataset& train, const std::string& attribute, std::size_t count,
                       TuneDirection direction, std::uint64_t seed);

// Analytic tuning: adjustment_count flips from privileged to unprivileged.
TuneResult cot_phi(const Dataset& train, const std::string& attribute, std::uint64_t seed);

// (1 - F1) + (1 - accuracy) + |SPD| + |AOD| + |EOD|
double loss_single(const MetricsBundle& m);
// (1 - F1) + (1 - accuracy) + ISPD + IAOD + IEOD; throws kConfig when the
// bundle carries no intersectional metrics.
double loss_intersectional(const MetricsBundle& m);

// Validation loss of a classifier fitted on the inner-training split after
// tuning `attribute` by proportion p. The inner split is a seeded partition of
// the training data. Results are cached by flip count (the objective is
// piecewise constant in p), and the call operator is thread-safe.
class OptObjective {
 public:
  OptObjective(const Dataset& train, std::string attribute,
               std::vector<std::string> loss_attributes, const OptConfig& config,
               std::uint64_t seed);
  ~OptObjective();

  double operator()(double p) const;

  std::size_t candidate_count() const;
  // Analytic proportion on the inner-training split (0 when phi <= 0).
  double analytic_proportion() const;
  std::int64_t distinct_fits() const;
  const Dataset& inner_train() const;
  const Dataset& validation() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// Searched tuning: PSO over p in [lower, upper] on OptObjective, then the
// best p applied to the full training set with the same seed.
TuneResult cot_opt(const Dataset& train, const std::string& attribute, const OptConfig& config,
                   std::uint64_t seed);

// Sequential tuning of several attributes in list order. The searched variant
// scores every stage with the intersectional loss over all listed attributes.
TuneResult cot_multi(const Dataset& train, std::span<const std::string> attributes,
                     TuneMethod method, const OptConfig& config, std::uint64_t seed);

}  // namespace cot
