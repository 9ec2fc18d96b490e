#include "cot/random.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "cot/error.hpp"

namespace cot {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kCardinality: return "cardinality error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kSize: return "size error";
    case ErrorKind::kUndefinedCorrelation: return "undefined-correlation error";
    case ErrorKind::kProportion: return "proportion error";
    case ErrorKind::kCandidate: return "candidate error";
    case ErrorKind::kTraining: return "training error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kGroupSupport: return "group-support error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kIo: return "I/O error";
  }
  return "error";
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (spare_) {
    double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection keeps the draw unbiased for bounds that do not divide 2^64.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % bound;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace cot
