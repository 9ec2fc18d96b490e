#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace cot {

// Seeded generator with distribution code written out here rather than taken
// from <random>, whose distributions are implementation-defined. Given a seed
// the stream is identical on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  // Standard normal (Box-Muller, second variate cached).
  double normal();

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// Independent sub-stream seed for (base, stream); splitmix64 finalizer.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace cot
