#pragma once

#include <span>

#include <json.hpp>

namespace cot {

inline constexpr double kSignificanceLevel = 0.05;
inline constexpr double kLargeEffect = 0.428;

struct MannWhitney {
  double u = 0.0;  // U of the first sample
  double p = 1.0;  // two-sided
};

// Midranks over the pooled sample; normal approximation with tie and
// continuity corrections. A zero tie-corrected variance gives p = 1.
// Throws kSize on an empty sample.
MannWhitney mann_whitney_u(std::span<const double> x, std::span<const double> y);

// (#{x_i > y_j} - #{x_i < y_j}) / (|x| |y|). Throws kSize on an empty sample.
double cliffs_delta(std::span<const double> x, std::span<const double> y);

inline bool is_large_effect(double delta) { return delta >= kLargeEffect || delta <= -kLargeEffect; }

struct TestResult {
  double u_statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;
  double delta = 0.0;
  bool large_effect = false;
};

TestResult compare(std::span<const double> x, std::span<const double> y);

nlohmann::json test_result_to_json(const TestResult& r);
TestResult test_result_from_json(const nlohmann::json& doc);

}  // namespace cot
