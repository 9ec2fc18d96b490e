#include "cot/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "cot/error.hpp"
#include "cot/random.hpp"

namespace cot {

void PsoConfig::validate() const {
  if (particles < 2) throw Error(ErrorKind::kConfig, "PSO needs at least two particles");
  if (iterations < 1) throw Error(ErrorKind::kConfig, "PSO needs at least one iteration");
  if (!(std::isfinite(lower) && std::isfinite(upper) && lower < upper)) {
    throw Error(ErrorKind::kConfig, "PSO bounds must be finite with lower < upper");
  }
  if (!std::isfinite(inertia) || !std::isfinite(cognitive) || !std::isfinite(social)) {
    throw Error(ErrorKind::kConfig, "PSO coefficients must be finite");
  }
}

nlohmann::json pso_config_to_json(const PsoConfig& c) {
  return {{"particles", c.particles}, {"iterations", c.iterations}, {"inertia", c.inertia},
          {"cognitive", c.cognitive}, {"social", c.social},         {"lower", c.lower},
          {"upper", c.upper}};
}

PsoConfig pso_config_from_json(const nlohmann::json& doc, PsoConfig c) {
  try {
    c.particles = doc.value("particles", c.particles);
    c.iterations = doc.value("iterations", c.iterations);
    c.inertia = doc.value("inertia", c.inertia);
    c.cognitive = doc.value("cognitive", c.cognitive);
    c.social = doc.value("social", c.social);
    c.lower = doc.value("lower", c.lower);
    c.upper = doc.value("upper", c.upper);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed PSO config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

void evaluate_all(const std::function<double(double)>& objective,
                  const std::vector<double>& positions, std::vector<double>& values,
                  Execution execution) {
  const auto n = static_cast<std::ptrdiff_t>(positions.size());
  if (execution == Execution::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) values[i] = objective(positions[i]);
    return;
  }
  std::vector<std::exception_ptr> failures(positions.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      values[static_cast<std::size_t>(i)] = objective(positions[static_cast<std::size_t>(i)]);
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

}  // namespace

PsoResult minimize_scalar(const std::function<double(double)>& objective, const PsoConfig& config,
                          std::uint64_t seed, std::span<const double> warm_start,
                          Execution execution) {
  config.validate();
  const auto np = static_cast<std::size_t>(config.particles);
  if (warm_start.size() > np) {
    throw Error(ErrorKind::kConfig, "more warm-start positions than particles");
  }
  Rng rng(seed);
  const double width = config.upper - config.lower;
  auto clamp = [&](double x) { return std::clamp(x, config.lower, config.upper); };

  std::vector<double> position(np), velocity(np, 0.0), value(np);
  for (std::size_t i = 0; i < np; ++i) {
    const double u = config.lower + width * rng.uniform();
    position[i] = i < warm_start.size() ? clamp(warm_start[i]) : u;
  }

  PsoResult result;
  result.initial_positions = position;
  evaluate_all(objective, position, value, execution);
  result.evaluations = static_cast<std::int64_t>(np);

  std::vector<double> best_position = position;
  std::vector<double> best_value = value;
  std::size_t leader = 0;
  for (std::size_t i = 1; i < np; ++i) {
    if (value[i] < value[leader] || (value[i] == value[leader] && position[i] < position[leader])) {
      leader = i;
    }
  }
  double g_x = position[leader];
  double g_f = value[leader];
  result.best_history.push_back(g_f);

  std::vector<double> r1(np), r2(np);
  for (int it = 0; it < config.iterations; ++it) {
    for (std::size_t i = 0; i < np; ++i) {
      r1[i] = rng.uniform();
      r2[i] = rng.uniform();
    }
    for (std::size_t i = 0; i < np; ++i) {
      velocity[i] = config.inertia * velocity[i] +
                    config.cognitive * r1[i] * (best_position[i] - position[i]) +
                    config.social * r2[i] * (g_x - position[i]);
      position[i] = clamp(position[i] + velocity[i]);
    }
    evaluate_all(objective, position, value, execution);
    result.evaluations += static_cast<std::int64_t>(np);
    for (std::size_t i = 0; i < np; ++i) {
      if (value[i] < best_value[i]) {
        best_value[i] = value[i];
        best_position[i] = position[i];
      }
      if (value[i] < g_f) {
        g_f = value[i];
        g_x = position[i];
      }
    }
    result.best_history.push_back(g_f);
  }
  result.x_best = g_x;
  result.f_best = g_f;
  return result;
}

}  // namespace cot
