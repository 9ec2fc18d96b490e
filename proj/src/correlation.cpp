#include "cot/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cot/error.hpp"

namespace cot {

namespace {

__extension__ using i128 = __int128;

// Signed cross-product n11*n00 - n10*n01 of the table after k flips.
i128 cross_product(const ContingencyTable& t) {
  return static_cast<i128>(t.n11) * t.n00 - static_cast<i128>(t.n10) * t.n01;
}

// Sign of |phi(a)| - |phi(b)|. The label marginals are unchanged by flips, so
// only cross-product and group sizes enter; compared exactly when the products
// fit in 128 bits.
int compare_abs_phi(const ContingencyTable& a, const ContingencyTable& b) {
  const i128 na = cross_product(a) < 0 ? -cross_product(a) : cross_product(a);
  const i128 nb = cross_product(b) < 0 ? -cross_product(b) : cross_product(b);
  const i128 ga = static_cast<i128>(a.privileged()) * a.unprivileged();
  const i128 gb = static_cast<i128>(b.privileged()) * b.unprivileged();
  i128 na2, nb2, lhs, rhs;
  if (!__builtin_mul_overflow(na, na, &na2) && !__builtin_mul_overflow(nb, nb, &nb2) &&
      !__builtin_mul_overflow(na2, gb, &lhs) && !__builtin_mul_overflow(nb2, ga, &rhs)) {
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
  }
  const long double pa = std::fabs(static_cast<long double>(phi(a)));
  const long double pb = std::fabs(static_cast<long double>(phi(b)));
  return pa < pb ? -1 : (pa > pb ? 1 : 0);
}

}  // namespace

ContingencyTable contingency(std::span<const std::uint8_t> sensitive,
                             std::span<const std::uint8_t> labels) {
  if (sensitive.size() != labels.size()) {
    throw Error(ErrorKind::kShape, "sensitive and label vectors differ in length");
  }
  ContingencyTable t;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (sensitive[i]) {
      (labels[i] ? t.n11 : t.n10) += 1;
    } else {
      (labels[i] ? t.n01 : t.n00) += 1;
    }
  }
  return t;
}

ContingencyTable contingency(const Dataset& data, std::string_view attribute) {
  return contingency(data.sensitive(attribute), data.labels());
}

bool phi_defined(const ContingencyTable& t) {
  return t.n11 >= 0 && t.n10 >= 0 && t.n01 >= 0 && t.n00 >= 0 && t.privileged() > 0 &&
         t.unprivileged() > 0 && t.favorable() > 0 && t.unfavorable() > 0;
}

double phi(const ContingencyTable& t) {
  if (!phi_defined(t)) {
    throw Error(ErrorKind::kUndefinedCorrelation,
                "phi is undefined for table (" + std::to_string(t.n11) + ", " +
                    std::to_string(t.n10) + ", " + std::to_string(t.n01) + ", " +
                    std::to_string(t.n00) + "): a marginal is zero");
  }
  const double numerator = static_cast<double>(t.n11) * static_cast<double>(t.n00) -
                           static_cast<double>(t.n10) * static_cast<double>(t.n01);
  const double denominator =
      std::sqrt(static_cast<double>(t.privileged()) * static_cast<double>(t.unprivileged()) *
                static_cast<double>(t.favorable()) * static_cast<double>(t.unfavorable()));
  return std::clamp(numerator / denominator, -1.0, 1.0);
}

std::int64_t adjustment_count(const ContingencyTable& t) {
  if (phi(t) <= 0.0) return 0;
  // Every flip keeps n_y and grows the unprivileged group; only the
  // privileged group can run dry.
  const std::int64_t k_max = t.n10 > 0 ? t.n11 : t.n11 - 1;
  if (k_max <= 0) return 0;

  const i128 numerator = cross_product(t);
  const std::int64_t denominator = t.n00 + t.n10;
  const auto k_floor = static_cast<std::int64_t>(numerator / denominator);
  const std::int64_t lo = std::min(k_floor, k_max);
  const std::int64_t hi = std::min(k_floor + 1, k_max);
  if (lo == hi) return lo;
  return compare_abs_phi(t.after_flips(hi), t.after_flips(lo)) < 0 ? hi : lo;
}

double adjustment_proportion(const ContingencyTable& t) {
  if (t.n11 <= 0) {
    throw Error(ErrorKind::kProportion,
                "adjustment proportion needs at least one privileged favorable row");
  }
  return static_cast<double>(adjustment_count(t)) / static_cast<double>(t.n11);
}

}  // namespace cot
