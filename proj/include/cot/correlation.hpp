#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "cot/tabular.hpp"

namespace cot {

// 2x2 counts of (sensitive attribute, label). Marginals are always derived.
struct ContingencyTable {
  std::int64_t n11 = 0;  // a=1, y=1
  std::int64_t n10 = 0;  // a=1, y=0
  std::int64_t n01 = 0;  // a=0, y=1
  std::int64_t n00 = 0;  // a=0, y=0

  std::int64_t total() const { return n11 + n10 + n01 + n00; }
  std::int64_t privileged() const { return n11 + n10; }
  std::int64_t unprivileged() const { return n01 + n00; }
  std::int64_t favorable() const { return n11 + n01; }
  std::int64_t unfavorable() const { return n10 + n00; }

  // Table after moving k rows from (a=1,y=1) to (a=0,y=1).
  ContingencyTable after_flips(std::int64_t k) const { return {n11 - k, n10, n01 + k, n00}; }

  bool operator==(const ContingencyTable&) const = default;
};

ContingencyTable contingency(std::span<const std::uint8_t> sensitive,
                             std::span<const std::uint8_t> labels);
ContingencyTable contingency(const Dataset& data, std::string_view attribute);

// True when all four marginals are positive.
bool phi_defined(const ContingencyTable& t);

// Phi-coefficient (n11*n00 - n10*n01) / sqrt(n_a1 * n_a0 * n_y1 * n_y0).
// Throws kUndefinedCorrelation when a marginal is zero.
double phi(const ContingencyTable& t);

// Number of (a=1,y=1) rows to move to a=0 so that |phi| is as small as an
// integer count allows. Zero when phi <= 0. Otherwise the better of the two
// integers around k* = (n11*n00 - n10*n01) / (n00 + n10), where the
// cross-product of the adjusted table vanishes; ties go to the smaller k and
// counts that would empty the privileged group are excluded.
std::int64_t adjustment_count(const ContingencyTable& t);

// adjustment_count / n11. Throws kProportion when n11 == 0.
double adjustment_proportion(const ContingencyTable& t);

}  // namespace cot
