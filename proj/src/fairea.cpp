#include "cot/fairea.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "cot/error.hpp"
#include "cot/random.hpp"

namespace cot {

std::string to_string(FairnessMetric m) {
  switch (m) {
    case FairnessMetric::kSpd: return "spd";
    case FairnessMetric::kAod: return "aod";
    case FairnessMetric::kEod: return "eod";
  }
  return "?";
}

std::string to_string(PerformanceMetric m) {
  switch (m) {
    case PerformanceMetric::kAccuracy: return "accuracy";
    case PerformanceMetric::kPrecision: return "precision";
    case PerformanceMetric::kRecall: return "recall";
    case PerformanceMetric::kF1: return "f1";
    case PerformanceMetric::kMcc: return "mcc";
  }
  return "?";
}

std::string to_string(TradeoffRegion r) {
  switch (r) {
    case TradeoffRegion::kWinWin: return "win-win";
    case TradeoffRegion::kGood: return "good";
    case TradeoffRegion::kPoor: return "poor";
    case TradeoffRegion::kInverted: return "inverted";
    case TradeoffRegion::kLoseLose: return "lose-lose";
  }
  return "?";
}

FairnessMetric fairness_metric_from_string(std::string_view name) {
  for (auto m : kFairnessMetrics) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::kConfig, "unknown fairness metric '" + std::string(name) + "'");
}

PerformanceMetric performance_metric_from_string(std::string_view name) {
  for (auto m : kPerformanceMetrics) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::kConfig, "unknown performance metric '" + std::string(name) + "'");
}

TradeoffRegion tradeoff_region_from_string(std::string_view name) {
  for (auto r : {TradeoffRegion::kWinWin, TradeoffRegion::kGood, TradeoffRegion::kPoor,
                 TradeoffRegion::kInverted, TradeoffRegion::kLoseLose}) {
    if (to_string(r) == name) return r;
  }
  throw Error(ErrorKind::kConfig, "unknown trade-off region '" + std::string(name) + "'");
}

double fairness_value(const MetricsBundle& m, FairnessMetric metric) {
  switch (metric) {
    case FairnessMetric::kSpd: return m.spd;
    case FairnessMetric::kAod: return m.aod;
    case FairnessMetric::kEod: return m.eod;
  }
  return 0.0;
}

double performance_value(const MetricsBundle& m, PerformanceMetric metric) {
  switch (metric) {
    case PerformanceMetric::kAccuracy: return m.accuracy;
    case PerformanceMetric::kPrecision: return m.precision;
    case PerformanceMetric::kRecall: return m.recall;
    case PerformanceMetric::kF1: return m.f1;
    case PerformanceMetric::kMcc: return m.mcc;
  }
  return 0.0;
}

TradeoffPoint BaselineCurve::origin() const {
  if (points.empty()) throw Error(ErrorKind::kConfig, "baseline curve is empty");
  return {points.front().fairness, points.front().performance};
}

void BaselineCurve::validate() const {
  if (points.empty()) throw Error(ErrorKind::kConfig, "baseline curve is empty");
  if (points.front().mutation_rate != 0.0) {
    throw Error(ErrorKind::kConfig, "baseline curve must start at mutation rate 0");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].mutation_rate > points[i - 1].mutation_rate)) {
      throw Error(ErrorKind::kConfig, "baseline mutation rates must increase strictly");
    }
  }
}

std::vector<double> default_rates() {
  std::vector<double> rates;
  for (int i = 1; i <= 10; ++i) rates.push_back(i / 10.0);
  return rates;
}

namespace {

void check_rates(std::span<const double> rates, int repeats) {
  if (repeats < 1) throw Error(ErrorKind::kConfig, "baseline repeats must be at least 1");
  if (rates.empty()) throw Error(ErrorKind::kConfig, "baseline needs at least one mutation rate");
  double prev = 0.0;
  for (double r : rates) {
    if (!(r > prev && r <= 1.0)) {
      throw Error(ErrorKind::kConfig, "mutation rates must increase strictly within (0, 1]");
    }
    prev = r;
  }
}

std::uint8_t majority_label(std::span<const std::uint8_t> y_true) {
  const auto ones = std::count(y_true.begin(), y_true.end(), std::uint8_t{1});
  return 2 * static_cast<std::size_t>(ones) >= y_true.size() ? 1 : 0;
}

}  // namespace

std::vector<BaselineCurve> build_baselines(std::span<const std::uint8_t> y_true,
                                           std::span<const std::uint8_t> y_pred,
                                           std::span<const std::uint8_t> a,
                                           std::span<const double> rates, int repeats,
                                           std::uint64_t seed) {
  check_rates(rates, repeats);
  const std::vector<std::span<const std::uint8_t>> groups{a};
  const MetricsBundle base = evaluate(y_true, y_pred, groups);
  const std::uint8_t target = majority_label(y_true);
  const std::size_t n = y_true.size();
  const auto reps = static_cast<std::size_t>(repeats);
  const std::size_t jobs = rates.size() * reps;

  std::vector<MetricsBundle> mutated(jobs);
  std::vector<std::exception_ptr> failures(jobs);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t job = 0; job < static_cast<std::ptrdiff_t>(jobs); ++job) {
    const auto j = static_cast<std::size_t>(job);
    try {
      const std::size_t ri = j / reps;
      Rng rng(derive_seed(derive_seed(seed, ri), j % reps));
      const auto order = rng.permutation(n);
      const auto count = std::min(
          n, static_cast<std::size_t>(std::floor(rates[ri] * static_cast<double>(n) + 1e-9)));
      Dataset::Binary pred(y_pred.begin(), y_pred.end());
      for (std::size_t i = 0; i < count; ++i) pred[order[i]] = target;
      mutated[j] = evaluate(y_true, pred, groups);
    } catch (...) {
      failures[j] = std::current_exception();
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::vector<BaselineCurve> curves;
  for (auto fm : kFairnessMetrics) {
    for (auto pm : kPerformanceMetrics) {
      BaselineCurve curve{fm, pm, {}};
      curve.points.push_back({0.0, fairness_value(base, fm), performance_value(base, pm)});
      for (std::size_t ri = 0; ri < rates.size(); ++ri) {
        double f = 0.0, p = 0.0;
        for (std::size_t k = 0; k < reps; ++k) {
          f += fairness_value(mutated[ri * reps + k], fm);
          p += performance_value(mutated[ri * reps + k], pm);
        }
        curve.points.push_back({rates[ri], f / static_cast<double>(reps),
                                p / static_cast<double>(reps)});
      }
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

BaselineCurve build_baseline(std::span<const std::uint8_t> y_true,
                             std::span<const std::uint8_t> y_pred,
                             std::span<const std::uint8_t> a, FairnessMetric fairness,
                             PerformanceMetric performance, std::span<const double> rates,
                             int repeats, std::uint64_t seed) {
  auto curves = build_baselines(y_true, y_pred, a, rates, repeats, seed);
  for (auto& c : curves) {
    if (c.fairness_metric == fairness && c.performance_metric == performance) return std::move(c);
  }
  throw Error(ErrorKind::kConfig, "metric pair not found");
}

double baseline_performance(const BaselineCurve& curve, double fairness) {
  curve.validate();
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : curve.points) pts.emplace_back(p.fairness, p.performance);
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& l, const auto& r) { return l.first < r.first; });
  // Collapse equal fairness values.
  std::vector<std::pair<double, double>> xs;
  for (std::size_t i = 0; i < pts.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < pts.size() && pts[j].first == pts[i].first) sum += pts[j++].second;
    xs.emplace_back(pts[i].first, sum / static_cast<double>(j - i));
    i = j;
  }
  if (fairness <= xs.front().first) return xs.front().second;
  if (fairness >= xs.back().first) return xs.back().second;
  const auto hi = std::upper_bound(xs.begin(), xs.end(), fairness,
                                   [](double v, const auto& p) { return v < p.first; });
  const auto lo = hi - 1;
  const double t = (fairness - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

TradeoffRegion classify(TradeoffPoint candidate, const BaselineCurve& curve) {
  const auto o = curve.origin();
  const bool fairer = candidate.fairness < o.fairness;
  const bool stronger = candidate.performance > o.performance;
  if (fairer && stronger) return TradeoffRegion::kWinWin;
  if (stronger) return TradeoffRegion::kInverted;
  if (!fairer) return TradeoffRegion::kLoseLose;
  return candidate.performance > baseline_performance(curve, candidate.fairness)
             ? TradeoffRegion::kGood
             : TradeoffRegion::kPoor;
}

nlohmann::json baseline_to_json(const BaselineCurve& curve) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : curve.points) {
    points.push_back(
        {{"mutation_rate", p.mutation_rate}, {"fairness", p.fairness}, {"performance", p.performance}});
  }
  return {{"fairness_metric", to_string(curve.fairness_metric)},
          {"performance_metric", to_string(curve.performance_metric)},
          {"points", std::move(points)}};
}

BaselineCurve baseline_from_json(const nlohmann::json& doc) {
  BaselineCurve curve;
  try {
    curve.fairness_metric = fairness_metric_from_string(doc.at("fairness_metric").get<std::string>());
    curve.performance_metric =
        performance_metric_from_string(doc.at("performance_metric").get<std::string>());
    for (const auto& p : doc.at("points")) {
      curve.points.push_back({p.at("mutation_rate").get<double>(), p.at("fairness").get<double>(),
                              p.at("performance").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed baseline document: ") + e.what());
  }
  curve.validate();
  return curve;
}

}  // namespace cot
