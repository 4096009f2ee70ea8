// Micro-benchmarks for the hot paths: single cell steps, full-window
// gradients, and the block-bootstrap metric distribution.

#include <benchmark/benchmark.h>

#include <vector>

#include "liquidcast/bootstrap.hpp"
#include "liquidcast/cells.hpp"
#include "liquidcast/rng.hpp"
#include "liquidcast/sample.hpp"
#include "liquidcast/training.hpp"

namespace {

using liquidcast::Rng;
using namespace liquidcast::cells;

constexpr int kHidden = 12;
constexpr int kInput = 16;
constexpr int kWindow = 30;

ModelParams make_model(ArchKind arch) {
  return init_params(arch, kHidden, kInput, 7);
}

liquidcast::numerics::Matrix make_window(std::uint64_t seed) {
  Rng rng(seed);
  liquidcast::numerics::Matrix w(kWindow, kInput);
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.normal();
  }
  return w;
}

void bench_forward(benchmark::State& state, ArchKind arch) {
  const ModelParams p = make_model(arch);
  const auto window = make_window(11);
  const std::vector<double> gaps(kWindow, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_window(p, window, gaps));
  }
}

void bench_grad(benchmark::State& state, ArchKind arch) {
  const ModelParams p = make_model(arch);
  std::vector<liquidcast::SequenceSample> batch;
  for (std::uint64_t b = 0; b < 32; ++b) {
    liquidcast::SequenceSample s;
    s.window = make_window(100 + b);
    s.gaps.assign(kWindow, 1.0);
    s.target = 0.25;
    s.t_eval_row = 0;
    batch.push_back(std::move(s));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(liquidcast::training::grad(p, batch));
  }
}

void bench_bootstrap(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> y(160), y_hat(160);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = rng.normal();
    y_hat[i] = 0.5 * y[i] + 0.5 * rng.normal();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        liquidcast::bootstrap::bootstrap_metrics(y, y_hat, 300, 5));
  }
}

}  // namespace

BENCHMARK_CAPTURE(bench_forward, lstm, ArchKind::Lstm);
BENCHMARK_CAPTURE(bench_forward, strict_cfc, ArchKind::StrictCfc);
BENCHMARK_CAPTURE(bench_forward, ltc, ArchKind::Ltc);
BENCHMARK_CAPTURE(bench_forward, hybrid_cfc, ArchKind::HybridCfc);
BENCHMARK_CAPTURE(bench_forward, ct_ltc, ArchKind::CtLtc);

BENCHMARK_CAPTURE(bench_grad, lstm, ArchKind::Lstm);
BENCHMARK_CAPTURE(bench_grad, strict_cfc, ArchKind::StrictCfc);
BENCHMARK_CAPTURE(bench_grad, ltc, ArchKind::Ltc);
BENCHMARK_CAPTURE(bench_grad, hybrid_cfc, ArchKind::HybridCfc);
BENCHMARK_CAPTURE(bench_grad, ct_ltc, ArchKind::CtLtc);

BENCHMARK(bench_bootstrap);

BENCHMARK_MAIN();
