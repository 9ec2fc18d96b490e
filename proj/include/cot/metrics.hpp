#pragma once

// Performance metrics, single-attribute and intersectional group fairness.
//
// Ratios with a zero denominator evaluate to 0. Fairness values are reported
// as magnitudes.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cot/tabular.hpp"

namespace cot {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  static ConfusionCounts tally(std::span<const std::uint8_t> y_true,
                               std::span<const std::uint8_t> y_pred);
};

struct PerformanceMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
};

PerformanceMetrics performance(std::span<const std::uint8_t> y_true,
                               std::span<const std::uint8_t> y_pred);
PerformanceMetrics performance(const ConfusionCounts& c);

struct GroupFairness {
  double spd = 0.0;  // |P[yhat=1|a=0] - P[yhat=1|a=1]|
  double aod = 0.0;  // 0.5 * |(FPR0 - FPR1) + (TPR0 - TPR1)|
  double eod = 0.0;  // |TPR0 - TPR1|
  double tpr_unprivileged = 0.0;
  double tpr_privileged = 0.0;
};

// Throws kGroupSupport when a group is empty or lacks positive or negative
// labels.
GroupFairness group_fairness(std::span<const std::uint8_t> y_true,
                             std::span<const std::uint8_t> y_pred,
                             std::span<const std::uint8_t> sensitive);

struct IntersectionalFairness {
  double ispd = 0.0;  // max_s P[yhat=1|s] - min_s P[yhat=1|s]
  double iaod = 0.0;  // 0.5 * (max_s (FPR_s + TPR_s) - min_s (FPR_s + TPR_s))
  double ieod = 0.0;  // max_s TPR_s - min_s TPR_s
};

// Over the subgroups present in `subgroup_ids` (at least two). Every present
// subgroup needs positive and negative labels.
IntersectionalFairness intersectional_fairness(std::span<const std::uint8_t> y_true,
                                               std::span<const std::uint8_t> y_pred,
                                               std::span<const std::uint32_t> subgroup_ids);

// Subgroup id of each row: the attribute values as bits, first attribute in
// the most significant position.
std::vector<std::uint32_t> subgroups(const Dataset& data, std::span<const std::string> attributes);

// Checks the label-side support conditions of group_fairness /
// intersectional_fairness; these do not depend on predictions.
void check_group_support(std::span<const std::uint8_t> y_true,
                         std::span<const std::uint8_t> sensitive);
void check_subgroup_support(std::span<const std::uint8_t> y_true,
                            std::span<const std::uint32_t> subgroup_ids);

struct MetricsBundle {
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  double spd = 0.0;
  double aod = 0.0;
  double eod = 0.0;
  double tpr_unprivileged = 0.0;
  double tpr_privileged = 0.0;
  std::optional<double> ispd;
  std::optional<double> iaod;
  std::optional<double> ieod;
};

// Performance, group fairness for attributes[0], and intersectional fairness
// across all attributes when two or more are given.
MetricsBundle evaluate(std::span<const std::uint8_t> y_pred, const Dataset& data,
                       std::span<const std::string> attributes);

// Same, from raw vectors; `sensitive` holds one vector per attribute.
MetricsBundle evaluate(std::span<const std::uint8_t> y_true, std::span<const std::uint8_t> y_pred,
                       const std::vector<std::span<const std::uint8_t>>& sensitive);

nlohmann::json metrics_to_json(const MetricsBundle& m);
MetricsBundle metrics_from_json(const nlohmann::json& doc);

// Names of the scalar metrics in report order; `has_intersectional` appends
// ispd, iaod and ieod.
std::vector<std::string> metric_names(bool has_intersectional);
double metric_value(const MetricsBundle& m, const std::string& name);

}  // namespace cot
