#pragma once

// Fairness/performance trade-off baseline: a reference curve obtained by
// replacing growing fractions of a model's predictions with the majority
// label, and the five-region classification of a mitigated model against it.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cot/metrics.hpp"

namespace cot {

enum class FairnessMetric { kSpd, kAod, kEod };
enum class PerformanceMetric { kAccuracy, kPrecision, kRecall, kF1, kMcc };
enum class TradeoffRegion { kWinWin, kGood, kPoor, kInverted, kLoseLose };

inline constexpr std::array<FairnessMetric, 3> kFairnessMetrics{
    FairnessMetric::kSpd, FairnessMetric::kAod, FairnessMetric::kEod};
inline constexpr std::array<PerformanceMetric, 5> kPerformanceMetrics{
    PerformanceMetric::kAccuracy, PerformanceMetric::kPrecision, PerformanceMetric::kRecall,
    PerformanceMetric::kF1, PerformanceMetric::kMcc};

std::string to_string(FairnessMetric m);
std::string to_string(PerformanceMetric m);
std::string to_string(TradeoffRegion r);
// Inverses of to_string; throw kConfig on unknown names.
FairnessMetric fairness_metric_from_string(std::string_view name);
PerformanceMetric performance_metric_from_string(std::string_view name);
TradeoffRegion tradeoff_region_from_string(std::string_view name);

double fairness_value(const MetricsBundle& m, FairnessMetric metric);
double performance_value(const MetricsBundle& m, PerformanceMetric metric);

struct TradeoffPoint {
  double fairness = 0.0;  // bias magnitude, smaller is better
  double performance = 0.0;
};

struct CurvePoint {
  double mutation_rate = 0.0;
  double fairness = 0.0;
  double performance = 0.0;
};

struct BaselineCurve {
  FairnessMetric fairness_metric = FairnessMetric::kSpd;
  PerformanceMetric performance_metric = PerformanceMetric::kAccuracy;
  // Rate 0 (the unmitigated model) first, rates strictly increasing.
  std::vector<CurvePoint> points;

  TradeoffPoint origin() const;
  // Throws kConfig when empty, not starting at rate 0, or not increasing.
  void validate() const;
};

// 0.1, 0.2, ..., 1.0
std::vector<double> default_rates();

// For each rate r and repeat, a seeded uniform floor(r * n) of the predictions
// are set to the majority class of y_true (ties pick the favorable class), and
// the metric pair is averaged over repeats. Throws kGroupSupport when `a`
// lacks the support the fairness metrics need, kConfig on bad rates/repeats.
BaselineCurve build_baseline(std::span<const std::uint8_t> y_true,
                             std::span<const std::uint8_t> y_pred,
                             std::span<const std::uint8_t> a, FairnessMetric fairness,
                             PerformanceMetric performance, std::span<const double> rates,
                             int repeats, std::uint64_t seed);

// All fairness x performance curves from one set of mutations, in
// kFairnessMetrics-major order. Curve i here equals the single-pair
// build_baseline call with the same arguments.
std::vector<BaselineCurve> build_baselines(std::span<const std::uint8_t> y_true,
                                           std::span<const std::uint8_t> y_pred,
                                           std::span<const std::uint8_t> a,
                                           std::span<const double> rates, int repeats,
                                           std::uint64_t seed);

// Piecewise-linear performance of the curve at `fairness`, with the curve
// read as a function of its fairness values (points with equal fairness are
// averaged) and `fairness` clamped to the curve's range.
double baseline_performance(const BaselineCurve& curve, double fairness);

// Relative to the curve origin: better fairness means strictly smaller bias,
// better performance strictly larger.
//   fairness better, performance better      -> WinWin
//   fairness not better, performance better  -> Inverted
//   neither better                           -> LoseLose
//   fairness better, performance not better  -> Good when performance is above
//                                               the baseline, else Poor
TradeoffRegion classify(TradeoffPoint candidate, const BaselineCurve& curve);

nlohmann::json baseline_to_json(const BaselineCurve& curve);
BaselineCurve baseline_from_json(const nlohmann::json& doc);

}  // namespace cot
