#pragma once

// Repeated seeded experiments: split, fit the unmitigated model, tune the
// training split, refit, and compare both models on the same test split.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cot/classifier.hpp"
#include "cot/cot.hpp"
#include "cot/fairea.hpp"
#include "cot/metrics.hpp"
#include "cot/optimizer.hpp"
#include "cot/stats.hpp"
#include "cot/tabular.hpp"

namespace cot {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kReportFormat = 1;

enum class Method { kOriginal, kCotPhi, kCotOpt };

std::string to_string(Method m);
// Accepts original, phi and opt. Throws kConfig otherwise.
Method method_from_string(std::string_view name);

struct ExperimentConfig {
  std::filesystem::path data_path;
  std::filesystem::path schema_path;
  Method method = Method::kCotPhi;
  std::vector<std::string> attrs;
  int runs = 20;
  std::uint64_t seed_base = 0;
  double train_fraction = 0.7;
  ClassifierConfig classifier;
  // The search's own classifier settings are replaced by `classifier`.
  OptConfig opt;
  std::vector<double> baseline_rates = default_rates();
  int baseline_repeats = 10;
  std::filesystem::path output_path;

  void validate() const;
};

nlohmann::ordered_json experiment_config_to_json(const ExperimentConfig& config);
// Missing keys keep the values of `defaults`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc,
                                             ExperimentConfig defaults = {});

struct TradeoffRecord {
  FairnessMetric fairness_metric = FairnessMetric::kSpd;
  PerformanceMetric performance_metric = PerformanceMetric::kAccuracy;
  double fairness = 0.0;  // the mitigated model's values
  double performance = 0.0;
  TradeoffRegion region = TradeoffRegion::kLoseLose;

  bool operator==(const TradeoffRecord&) const = default;
};

struct RunRecord {
  int run_index = 0;
  std::uint64_t seed = 0;
  MetricsBundle original;
  MetricsBundle method;
  std::size_t flips = 0;
  double proportion = 0.0;
  std::optional<double> phi_before;
  std::optional<double> phi_after;
  std::vector<TradeoffRecord> tradeoffs;  // kFairnessMetrics x kPerformanceMetrics
};

struct AggregateEntry {
  std::string metric;
  double mean_original = 0.0;
  double mean_method = 0.0;
  double absolute_change = 0.0;
  // (mean_method - mean_original) / mean_original; the absolute change when
  // mean_original is 0, with relative_is_absolute set.
  double relative_change = 0.0;
  bool relative_is_absolute = false;
};

struct StatisticsEntry {
  std::string metric;
  bool insufficient_sample = false;  // fewer than two runs
  std::optional<TestResult> result;  // original runs vs method runs
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RunRecord> per_run;  // ordered by run_index
  std::vector<AggregateEntry> aggregate;
  std::vector<StatisticsEntry> statistics;
};

// One run plus the row provenance needed to audit for leakage.
struct RunArtifacts {
  RunRecord record;
  std::vector<std::size_t> train_row_ids;
  std::vector<std::size_t> test_row_ids;
  std::vector<std::size_t> tuned_row_ids;
  std::vector<std::size_t> flipped_row_ids;
};

// Run `run_index` with seed seed_base + run_index. Errors carry the run index
// and the failing stage.
RunArtifacts execute_run(const Dataset& data, const ExperimentConfig& config, int run_index);

// Runs are independent and ordered by run_index before aggregation, so the
// execution mode never changes the report.
ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& config,
                                Execution execution = Execution::kParallel);
// Loads data_path with schema_path first.
ExperimentReport run_experiment(const ExperimentConfig& config,
                                Execution execution = Execution::kParallel);

// Metrics reported in aggregate/statistics for a report on `attrs`.
std::vector<std::string> fairness_metric_names(std::size_t attribute_count);

nlohmann::ordered_json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& doc);
std::string format_report(const ExperimentReport& report);
std::string format_tradeoff_csv(const ExperimentReport& report);

// Writes report.json and tradeoff.csv into `dir` (created if missing).
// Throws kIo when the files cannot be written.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

// Contingency, phi and analytic flip count for each attribute.
nlohmann::ordered_json phi_report(const Dataset& data, const std::vector<std::string>& attrs);

}  // namespace cot
