#include "cot/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cot/error.hpp"
#include "cot/kernels.hpp"

namespace cot {

namespace {

void require_samples(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw Error(ErrorKind::kSize, "rank statistics need non-empty samples");
}

}  // namespace

MannWhitney mann_whitney_u(std::span<const double> x, std::span<const double> y) {
  require_samples(x, y);
  const std::size_t n1 = x.size(), n2 = y.size(), n = n1 + n2;
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });

  std::vector<double> rank(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[order[j]] == pooled[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) rank[order[k]] = mid;
    const auto t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  double r1 = 0.0;
  for (std::size_t i = 0; i < n1; ++i) r1 += rank[i];

  const auto dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2);
  const auto dn = static_cast<double>(n);
  MannWhitney out;
  out.u = r1 - dn1 * (dn1 + 1.0) / 2.0;
  const double mean = dn1 * dn2 / 2.0;
  const double var =
      n > 1 ? dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0))) : 0.0;
  if (!(var > 0.0)) {
    out.p = 1.0;
    return out;
  }
  const double z = std::max(std::fabs(out.u - mean) - 0.5, 0.0) / std::sqrt(var);
  out.p = std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
  return out;
}

double cliffs_delta(std::span<const double> x, std::span<const double> y) {
  require_samples(x, y);
  const auto c = kernels::dominance_counts(x, y);
  return static_cast<double>(c.greater - c.less) /
         (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

TestResult compare(std::span<const double> x, std::span<const double> y) {
  const auto mw = mann_whitney_u(x, y);
  TestResult r;
  r.u_statistic = mw.u;
  r.p_value = mw.p;
  r.significant = mw.p < kSignificanceLevel;
  r.delta = cliffs_delta(x, y);
  r.large_effect = is_large_effect(r.delta);
  return r;
}

nlohmann::json test_result_to_json(const TestResult& r) {
  return {{"u_statistic", r.u_statistic},
          {"p_value", r.p_value},
          {"significant", r.significant},
          {"delta", r.delta},
          {"large_effect", r.large_effect}};
}

TestResult test_result_from_json(const nlohmann::json& doc) {
  try {
    return {doc.at("u_statistic").get<double>(), doc.at("p_value").get<double>(),
            doc.at("significant").get<bool>(), doc.at("delta").get<double>(),
            doc.at("large_effect").get<bool>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed test result: ") + e.what());
  }
}

}  // namespace cot
