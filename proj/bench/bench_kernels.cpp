// Serial reference vs OpenMP kernels, plus the parallel hot paths built on
// them (a full logistic fit and a PSO search).

#include <benchmark/benchmark.h>

#include <vector>

#include "cot/classifier.hpp"
#include "cot/cot.hpp"
#include "cot/kernels.hpp"
#include "cot/optimizer.hpp"
#include "cot/random.hpp"
#include "cot/tabular.hpp"

namespace {

struct Problem {
  std::vector<double> x;
  std::vector<std::uint8_t> y;
  std::vector<double> w;
  std::size_t rows;
  std::size_t cols;
};

Problem make_problem(std::size_t rows, std::size_t cols) {
  cot::Rng rng(7);
  Problem p{{}, {}, {}, rows, cols};
  p.x.resize(rows * cols);
  for (auto& v : p.x) v = rng.normal();
  p.y.resize(rows);
  for (auto& v : p.y) v = rng.uniform() < 0.5 ? 1 : 0;
  p.w.resize(cols);
  for (auto& v : p.w) v = 0.1 * rng.normal();
  return p;
}

template <bool Parallel>
void BM_LossGradient(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), 8);
  const cot::kernels::MatrixView x{p.x, p.rows, p.cols};
  for (auto _ : state) {
    auto g = Parallel ? cot::kernels::logistic_loss_gradient(x, p.y, p.w, 0.1, 1e-4)
                      : cot::kernels::logistic_loss_gradient_serial(x, p.y, p.w, 0.1, 1e-4);
    benchmark::DoNotOptimize(g.loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossGradient<false>)->Name("loss_gradient/serial")->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_LossGradient<true>)->Name("loss_gradient/omp")->RangeMultiplier(8)->Range(1 << 10, 1 << 19);

template <bool Parallel>
void BM_LinearScores(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), 8);
  const cot::kernels::MatrixView x{p.x, p.rows, p.cols};
  std::vector<double> out(p.rows);
  for (auto _ : state) {
    if (Parallel) {
      cot::kernels::linear_scores(x, p.w, 0.1, out);
    } else {
      cot::kernels::linear_scores_serial(x, p.w, 0.1, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LinearScores<false>)->Name("linear_scores/serial")->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_LinearScores<true>)->Name("linear_scores/omp")->RangeMultiplier(8)->Range(1 << 10, 1 << 19);

template <bool Parallel>
void BM_Dominance(benchmark::State& state) {
  cot::Rng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(n), b(n);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  for (auto _ : state) {
    auto c = Parallel ? cot::kernels::dominance_counts(a, b)
                      : cot::kernels::dominance_counts_serial(a, b);
    benchmark::DoNotOptimize(c.greater);
  }
}
BENCHMARK(BM_Dominance<false>)->Name("dominance/serial")->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_Dominance<true>)->Name("dominance/omp")->RangeMultiplier(4)->Range(64, 4096);

template <cot::Execution Mode>
void BM_PsoSearch(benchmark::State& state) {
  cot::SynthSpec spec;
  spec.n11 = 3000;
  spec.n10 = 2000;
  spec.n01 = 1000;
  spec.n00 = 4000;
  const auto data = cot::synthesize(spec);
  cot::OptConfig cfg;
  cfg.pso.iterations = 3;
  for (auto _ : state) {
    const cot::OptObjective objective(data, "a", {"a"}, cfg, 0);
    auto r = cot::minimize_scalar([&](double p) { return objective(p); }, cfg.pso, 1, {}, Mode);
    benchmark::DoNotOptimize(r.f_best);
  }
}
BENCHMARK(BM_PsoSearch<cot::Execution::kSerial>)->Name("pso_search/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PsoSearch<cot::Execution::kParallel>)->Name("pso_search/omp")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
