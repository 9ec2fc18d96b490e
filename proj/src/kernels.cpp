#include "cot/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "cot/error.hpp"

namespace cot::kernels {

namespace {

// softplus(z) = log(1 + exp(z)) and sigmoid(z) from a single exp(-|z|).
struct Logistic {
  double softplus, sigmoid;
};

inline Logistic logistic(double z) {
  const double e = std::exp(-std::fabs(z));
  const double inv = 1.0 / (1.0 + e);
  return {std::max(z, 0.0) + std::log1p(e), z >= 0.0 ? inv : e * inv};
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

void check_shapes(MatrixView x, std::span<const std::uint8_t> y, std::span<const double> w) {
  if (x.values.size() != x.rows * x.cols || y.size() != x.rows || w.size() != x.cols) {
    throw Error(ErrorKind::kShape, "logistic kernel received inconsistent shapes");
  }
  if (x.rows == 0) throw Error(ErrorKind::kShape, "logistic kernel needs at least one row");
}

// Accumulates rows [begin, end) into loss and gradient (size cols + 1, bias last).
void accumulate_rows(MatrixView x, std::span<const std::uint8_t> y, std::span<const double> w,
                     double bias, std::size_t begin, std::size_t end, double& loss,
                     std::span<double> grad) {
  for (std::size_t r = begin; r < end; ++r) {
    const auto xr = x.row(r);
    const double z = dot(xr, w) + bias;
    // Cross-entropy: softplus(z) - y*z.
    const auto l = logistic(z);
    loss += l.softplus - (y[r] ? z : 0.0);
    const double residual = l.sigmoid - static_cast<double>(y[r]);
    for (std::size_t j = 0; j < x.cols; ++j) grad[j] += residual * xr[j];
    grad[x.cols] += residual;
  }
}

LossGradient finish(MatrixView x, std::span<const double> w, double l2, double loss,
                    std::span<const double> grad) {
  const double inv_n = 1.0 / static_cast<double>(x.rows);
  LossGradient out;
  out.grad_weights.resize(x.cols);
  double penalty = 0.0;
  for (std::size_t j = 0; j < x.cols; ++j) {
    out.grad_weights[j] = grad[j] * inv_n + l2 * w[j];
    penalty += w[j] * w[j];
  }
  out.grad_bias = grad[x.cols] * inv_n;
  out.loss = loss * inv_n + 0.5 * l2 * penalty;
  return out;
}

}  // namespace

LossGradient logistic_loss_gradient_serial(MatrixView x, std::span<const std::uint8_t> y,
                                           std::span<const double> weights, double bias,
                                           double l2) {
  check_shapes(x, y, weights);
  double loss = 0.0;
  std::vector<double> grad(x.cols + 1, 0.0);
  accumulate_rows(x, y, weights, bias, 0, x.rows, loss, grad);
  return finish(x, weights, l2, loss, grad);
}

LossGradient logistic_loss_gradient(MatrixView x, std::span<const std::uint8_t> y,
                                    std::span<const double> weights, double bias, double l2) {
  check_shapes(x, y, weights);
  const std::size_t blocks = (x.rows + kBlockRows - 1) / kBlockRows;
  const std::size_t stride = x.cols + 2;  // gradient, bias gradient, loss
  std::vector<double> partial(blocks * stride, 0.0);

#pragma omp parallel for schedule(static) if (blocks > 1)
  for (std::size_t b = 0; b < blocks; ++b) {
    std::span<double> slot(partial.data() + b * stride, stride);
    const std::size_t begin = b * kBlockRows;
    const std::size_t end = std::min(begin + kBlockRows, x.rows);
    accumulate_rows(x, y, weights, bias, begin, end, slot[x.cols + 1], slot.first(x.cols + 1));
  }

  double loss = 0.0;
  std::vector<double> grad(x.cols + 1, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* slot = partial.data() + b * stride;
    for (std::size_t j = 0; j <= x.cols; ++j) grad[j] += slot[j];
    loss += slot[x.cols + 1];
  }
  return finish(x, weights, l2, loss, grad);
}

void linear_scores_serial(MatrixView x, std::span<const double> weights, double bias,
                          std::span<double> out) {
  if (out.size() != x.rows || weights.size() != x.cols) {
    throw Error(ErrorKind::kShape, "linear_scores received inconsistent shapes");
  }
  for (std::size_t r = 0; r < x.rows; ++r) out[r] = dot(x.row(r), weights) + bias;
}

void linear_scores(MatrixView x, std::span<const double> weights, double bias,
                   std::span<double> out) {
  if (out.size() != x.rows || weights.size() != x.cols) {
    throw Error(ErrorKind::kShape, "linear_scores received inconsistent shapes");
  }
  const auto n = static_cast<std::ptrdiff_t>(x.rows);
#pragma omp parallel for schedule(static) if (x.rows > kBlockRows)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    out[static_cast<std::size_t>(r)] = dot(x.row(static_cast<std::size_t>(r)), weights) + bias;
  }
}

DominanceCounts dominance_counts_serial(std::span<const double> x, std::span<const double> y) {
  DominanceCounts c;
  for (double xi : x) {
    for (double yj : y) {
      c.greater += xi > yj;
      c.less += xi < yj;
    }
  }
  return c;
}

DominanceCounts dominance_counts(std::span<const double> x, std::span<const double> y) {
  std::int64_t greater = 0;
  std::int64_t less = 0;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  // Integer sums: the reduction is exact whatever the order.
#pragma omp parallel for schedule(static) reduction(+ : greater, less) if (x.size() * y.size() > 65536)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    std::int64_t g = 0, l = 0;
    for (double yj : y) {
      g += xi > yj;
      l += xi < yj;
    }
    greater += g;
    less += l;
  }
  return {greater, less};
}

}  // namespace cot::kernels
