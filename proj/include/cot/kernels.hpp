#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference that the
// tests compare against and the benchmarks race.
//
// The OpenMP variants reduce over fixed row blocks and then fold the block
// partials in block order, so their results do not depend on the thread count
// or schedule. They may differ from the serial reference in the last bits
// because summation order differs.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cot::kernels {

inline constexpr std::size_t kBlockRows = 512;

// Row-major view of an n x d matrix.
struct MatrixView {
  std::span<const double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::span<const double> row(std::size_t r) const { return values.subspan(r * cols, cols); }
};

struct LossGradient {
  double loss = 0.0;  // mean cross-entropy + 0.5 * l2 * |w|^2
  std::vector<double> grad_weights;
  double grad_bias = 0.0;
};

// L2-regularized binary cross-entropy of sigmoid(x.w + b) against y, with its
// gradient. The bias is not regularized.
LossGradient logistic_loss_gradient_serial(MatrixView x, std::span<const std::uint8_t> y,
                                           std::span<const double> weights, double bias,
                                           double l2);
LossGradient logistic_loss_gradient(MatrixView x, std::span<const std::uint8_t> y,
                                    std::span<const double> weights, double bias, double l2);

// out[r] = x[r].w + b
void linear_scores_serial(MatrixView x, std::span<const double> weights, double bias,
                          std::span<double> out);
void linear_scores(MatrixView x, std::span<const double> weights, double bias,
                   std::span<double> out);

struct DominanceCounts {
  std::int64_t greater = 0;  // pairs with x_i > y_j
  std::int64_t less = 0;     // pairs with x_i < y_j
};

// Exhaustive pair counting over |x| * |y| pairs.
DominanceCounts dominance_counts_serial(std::span<const double> x, std::span<const double> y);
DominanceCounts dominance_counts(std::span<const double> x, std::span<const double> y);

}  // namespace cot::kernels
