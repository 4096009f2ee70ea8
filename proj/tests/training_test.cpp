#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fd_check.hpp"
#include "liquidcast/cells.hpp"
#include "liquidcast/errors.hpp"
#include "liquidcast/rng.hpp"
#include "liquidcast/training.hpp"
#include "support.hpp"

using liquidcast::Error;
using liquidcast::ErrorCode;
using liquidcast::Rng;
using liquidcast::SequenceSample;
using namespace liquidcast::cells;
using namespace liquidcast::training;

namespace {

constexpr ArchKind kAllArchs[] = {ArchKind::Lstm, ArchKind::StrictCfc,
                                  ArchKind::Ltc, ArchKind::HybridCfc,
                                  ArchKind::CtLtc};

// windows whose mean drives the target: learnable by every architecture
std::vector<SequenceSample> learnable_samples(std::size_t count, int window_len,
                                              int input, bool with_gaps,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SequenceSample> samples;
  for (std::size_t s = 0; s < count; ++s) {
    SequenceSample q;
    q.window.resize(window_len, input);
    for (int t = 0; t < window_len; ++t) {
      for (int j = 0; j < input; ++j) q.window(t, j) = rng.normal();
    }
    if (with_gaps) {
      q.gaps.assign(static_cast<std::size_t>(window_len), 1.0);
    }
    q.target = 0.5 * q.window.row(window_len - 1).mean();
    samples.push_back(std::move(q));
  }
  return samples;
}

}  // namespace

TEST_CASE("mse loss: exact values and input validation") {
  const std::vector<double> a{1.0, 2.0};
  CHECK(mse_loss(a, a) == 0.0);
  const std::vector<double> z{0.0, 0.0};
  CHECK(mse_loss(a, z) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS_AS((void)mse_loss({}, {}), Error);
  const std::vector<double> b{1.0};
  CHECK_THROWS_AS((void)mse_loss(a, b), Error);
}

TEST_CASE("analytic gradients match central finite differences") {
  for (const ArchKind arch : kAllArchs) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto report = testsup::fd_check(arch, 2, 2, 3, 2, seed);
      INFO(arch_name(arch), " seed ", seed, " worst ", report.worst_rel, " at ",
           report.worst_where);
      CHECK(report.checked > 0);
      CHECK(report.failed == 0);
    }
  }
}

TEST_CASE("grad validates its batch") {
  ModelParams p = init_params(ArchKind::Lstm, 2, 2, 0);
  CHECK_THROWS_AS((void)grad(p, {}), Error);
  auto batch = learnable_samples(1, 3, 2, false, 1);
  batch[0].window(1, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)grad(p, batch);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteForward);
  }
}

TEST_CASE("global norm and clipping: hand-checked 3-4-5 triangle") {
  ModelParams p = init_params(ArchKind::Ltc, 2, 2, 0);
  ModelParams g = zeros_like(p);
  auto arrays = param_arrays(g);
  arrays[0].data[0] = 3.0;
  arrays[1].data[0] = -4.0;
  CHECK(global_norm(g) == doctest::Approx(5.0).epsilon(1e-15));
  ModelParams clipped = g;
  const double pre = clip_gradients(clipped, 1.0);
  CHECK(pre == doctest::Approx(5.0).epsilon(1e-15));
  const auto ca = param_arrays(clipped);
  CHECK(ca[0].data[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(ca[1].data[0] == doctest::Approx(-0.8).epsilon(1e-15));
  CHECK(global_norm(clipped) == doctest::Approx(1.0).epsilon(1e-12));
  ModelParams untouched = g;
  (void)clip_gradients(untouched, 10.0);
  CHECK(testsup::params_equal(untouched, g));
}

TEST_CASE("adam first step matches the scalar update rule") {
  ModelParams p = init_params(ArchKind::Ltc, 2, 2, 0);
  ModelParams zero = zeros_like(p);
  p = zero;  // params at zero so weight decay contributes nothing
  AdamState state = make_adam_state(p);
  ModelParams g = zeros_like(p);
  param_arrays(g)[0].data[0] = 0.2;
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.weight_decay = 0.0;
  cfg.clip_norm = 10.0;
  adam_step(p, state, g, cfg);
  // bias-corrected first step: m_hat = g, v_hat = g^2
  const double expected = -0.01 * 0.2 / (0.2 + 1e-8);
  CHECK(param_arrays(p)[0].data[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(state.step == 1);
  // every other coordinate stays exactly zero
  CHECK(param_arrays(p)[1].data[0] == 0.0);
}

TEST_CASE("adam couples weight decay into the gradient") {
  ModelParams p = init_params(ArchKind::Ltc, 2, 2, 0);
  p = zeros_like(p);
  param_arrays(p)[0].data[0] = 0.5;
  AdamState state = make_adam_state(p);
  TrainConfig cfg;
  cfg.learning_rate = 0.001;
  cfg.weight_decay = 0.01;
  cfg.clip_norm = 10.0;
  adam_step(p, state, zeros_like(p), cfg);
  const double coupled = 0.01 * 0.5;  // wd * theta
  const double expected = 0.5 - 0.001 * coupled / (coupled + 1e-8);
  CHECK(param_arrays(p)[0].data[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("epoch order: seeded permutation, one fresh shuffle per epoch") {
  const auto a = epoch_order(20, 7, 0);
  const auto b = epoch_order(20, 7, 0);
  const auto c = epoch_order(20, 7, 1);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(c == epoch_order(20, 8, 0));  // epoch e shuffles with seed + e
  std::vector<std::size_t> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> iota(20);
  std::iota(iota.begin(), iota.end(), std::size_t{0});
  CHECK(sorted == iota);
}

TEST_CASE("run_epoch chunks the order and keeps the short tail batch") {
  auto samples = learnable_samples(5, 3, 2, false, 2);
  ModelParams p = init_params(ArchKind::Lstm, 3, 2, 4);
  AdamState state = make_adam_state(p);
  TrainConfig cfg;
  cfg.batch_size = 2;
  const auto order = epoch_order(samples.size(), 0, 0);
  const EpochStats stats = run_epoch(p, state, samples, order, cfg, 0);
  CHECK(stats.batches == 3);  // 2 + 2 + 1
  CHECK(stats.batches_skipped == 0);
  CHECK(std::isfinite(stats.mean_loss));
  CHECK(state.step == 3);
  TrainConfig bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS((void)run_epoch(p, state, samples, order, bad, 0), Error);
}

TEST_CASE("a poisoned batch is skipped without touching the optimizer") {
  auto samples = learnable_samples(8, 3, 2, false, 3);
  samples[2].window(0, 0) = std::numeric_limits<double>::quiet_NaN();
  samples[3].target = std::numeric_limits<double>::quiet_NaN();

  TrainConfig cfg;
  cfg.batch_size = 2;
  std::vector<std::size_t> full(8);
  std::iota(full.begin(), full.end(), std::size_t{0});
  const std::vector<std::size_t> pruned{0, 1, 4, 5, 6, 7};

  ModelParams pa = init_params(ArchKind::HybridCfc, 3, 2, 9);
  ModelParams pb = pa;
  AdamState sa = make_adam_state(pa);
  AdamState sb = make_adam_state(pb);
  const EpochStats ea = run_epoch(pa, sa, samples, full, cfg, 0);
  const EpochStats eb = run_epoch(pb, sb, samples, pruned, cfg, 0);
  CHECK(ea.batches == 4);
  CHECK(ea.batches_skipped == 1);
  CHECK(eb.batches_skipped == 0);
  CHECK(testsup::params_equal(pa, pb));
  CHECK(testsup::params_equal(sa.m, sb.m));
  CHECK(testsup::params_equal(sa.v, sb.v));
  CHECK(sa.step == sb.step);
}

TEST_CASE("an epoch with every batch skipped reports a NaN mean loss") {
  auto samples = learnable_samples(4, 3, 2, false, 5);
  for (auto& s : samples) s.target = std::numeric_limits<double>::quiet_NaN();
  ModelParams p = init_params(ArchKind::Lstm, 2, 2, 0);
  const ModelParams before = p;
  AdamState state = make_adam_state(p);
  TrainConfig cfg;
  cfg.batch_size = 2;
  const auto order = epoch_order(samples.size(), 0, 0);
  const EpochStats stats = run_epoch(p, state, samples, order, cfg, 0);
  CHECK(stats.batches_skipped == stats.batches);
  CHECK(std::isnan(stats.mean_loss));
  CHECK(testsup::params_equal(p, before));

  CHECK_THROWS_AS((void)train(p, samples, cfg), Error);
  try {
    (void)train(p, samples, cfg);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllBatchesSkipped);
  }
}

TEST_CASE("train validates emptiness, honors epochs = 0, and is deterministic") {
  ModelParams p = init_params(ArchKind::Lstm, 2, 2, 1);
  TrainConfig cfg;
  CHECK_THROWS_AS((void)train(p, {}, cfg), Error);

  auto samples = learnable_samples(6, 3, 2, false, 7);
  TrainConfig none;
  none.epochs = 0;
  const TrainResult unchanged = train(p, samples, none);
  CHECK(unchanged.trace.empty());
  CHECK(testsup::params_equal(unchanged.params, p));

  TrainConfig two;
  two.epochs = 2;
  two.batch_size = 3;
  two.seed = 11;
  const TrainResult a = train(p, samples, two);
  const TrainResult b = train(p, samples, two);
  CHECK(a.trace.size() == 2);
  CHECK(testsup::params_equal(a.params, b.params));
}

TEST_CASE("training reduces the loss on a learnable task") {
  for (const ArchKind arch : {ArchKind::Lstm, ArchKind::HybridCfc}) {
    auto samples =
        learnable_samples(40, 4, 2, arch == ArchKind::CtLtc, 13);
    ModelParams p = init_params(arch, 4, 2, 17);
    TrainConfig cfg;
    cfg.epochs = 12;
    cfg.batch_size = 8;
    cfg.learning_rate = 5e-3;
    const TrainResult r = train(p, samples, cfg);
    INFO(arch_name(arch), ": ", r.trace.front().mean_loss, " -> ",
         r.trace.back().mean_loss);
    CHECK(r.trace.back().mean_loss < 0.7 * r.trace.front().mean_loss);
  }
}

TEST_CASE("train never aborts on sporadically poisoned samples") {
  auto samples = learnable_samples(60, 4, 2, false, 19);
  Rng rng(23);
  for (int k = 0; k < 3; ++k) {
    samples[rng.below(samples.size())].window(1, 0) =
        std::numeric_limits<double>::quiet_NaN();
  }
  ModelParams p = init_params(ArchKind::StrictCfc, 3, 2, 29);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  const TrainResult r = train(p, samples, cfg);
  for (const auto& ref : param_arrays(r.params)) {
    for (std::size_t i = 0; i < ref.size; ++i) {
      REQUIRE(std::isfinite(ref.data[i]));
    }
  }
  int skipped = 0;
  for (const auto& e : r.trace) skipped += e.batches_skipped;
  CHECK(skipped > 0);
}
