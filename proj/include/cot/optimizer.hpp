#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

namespace cot {

struct PsoConfig {
  int particles = 10;
  int iterations = 20;
  double inertia = 0.7;
  double cognitive = 1.5;
  double social = 1.5;
  double lower = 0.0;
  double upper = 1.0;

  void validate() const;
};

nlohmann::json pso_config_to_json(const PsoConfig& config);
PsoConfig pso_config_from_json(const nlohmann::json& doc, PsoConfig defaults = {});

enum class Execution { kSerial, kParallel };

struct PsoResult {
  double x_best = 0.0;
  double f_best = 0.0;
  std::int64_t evaluations = 0;
  // Global best after initialization and after each iteration.
  std::vector<double> best_history;
  std::vector<double> initial_positions;
};

// Global-best particle swarm over [lower, upper]. Positions start uniform
// (seeded) except for the leading particles, which take `warm_start`
// positions when given; velocities start at zero; positions are clamped to the
// bounds after every move. The objective must be safe to call concurrently
// under Execution::kParallel. Random draws happen serially before each batch of
// evaluations and the global best is reduced in particle order, so both
// execution modes return identical results. A strictly better value replaces
// the incumbent; among initial ties the smaller position wins, then the lower
// particle index.
PsoResult minimize_scalar(const std::function<double(double)>& objective, const PsoConfig& config,
                          std::uint64_t seed, std::span<const double> warm_start = {},
                          Execution execution = Execution::kParallel);

}  // namespace cot
