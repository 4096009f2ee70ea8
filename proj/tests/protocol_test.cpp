#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "liquidcast/cells.hpp"
#include "liquidcast/dataset.hpp"
#include "liquidcast/errors.hpp"
#include "liquidcast/protocol.hpp"
#include "support.hpp"

using liquidcast::Error;
using liquidcast::ErrorCode;
using liquidcast::cells::ArchKind;
namespace ds = liquidcast::dataset;
namespace proto = liquidcast::protocol;

namespace {

ds::TimeSeriesFrame signal_frame(std::size_t raw_rows, std::uint64_t seed) {
  return ds::compute_returns(
      testsup::make_signal_price_frame(raw_rows, seed, 0.5));
}

proto::ProtocolConfig small_config() {
  proto::ProtocolConfig config;
  config.window_len = 6;
  config.hidden_sizes = {2};
  config.learning_rates = {1e-2, 5e-3};
  config.batch_sizes = {8};
  config.tuning_epochs = 2;
  config.final_epochs = 2;
  config.strata = 2;
  config.per_stratum = 2;
  config.seed = 42;
  return config;
}

}  // namespace

TEST_CASE("stratified draw: hand-walked bins with a remainder") {
  // span 23 over 3 bins -> lengths 8, 8, 7; two endpoints from each
  const auto idx = proto::stratified_indices(100, 123, 3, 2);
  CHECK(idx == std::vector<std::size_t>{100, 107, 108, 115, 116, 122});
}

TEST_CASE("stratified draw: a span equal to the request returns every index") {
  const auto idx = proto::stratified_indices(0, 160, 20, 8);
  std::vector<std::size_t> all(160);
  std::iota(all.begin(), all.end(), std::size_t{0});
  CHECK(idx == all);
}

TEST_CASE("stratified draw: wide span keeps indices strictly increasing and "
          "binned") {
  const auto idx = proto::stratified_indices(0, 1600, 20, 8);
  REQUIRE(idx.size() == 160);
  for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
  for (std::size_t b = 0; b < 20; ++b) {
    for (std::size_t j = 0; j < 8; ++j) {
      const std::size_t v = idx[b * 8 + j];
      CHECK(v >= b * 80);
      CHECK(v < (b + 1) * 80);
    }
  }
  CHECK(idx == proto::stratified_indices(0, 1600, 20, 8));  // deterministic
}

TEST_CASE("stratified draw: single index per bin sits at the middle") {
  CHECK(proto::stratified_indices(0, 11, 1, 1) == std::vector<std::size_t>{5});
}

TEST_CASE("stratified draw validation") {
  try {
    (void)proto::stratified_indices(0, 159, 20, 8);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SpanTooShort);
  }
  CHECK_THROWS_AS((void)proto::stratified_indices(0, 100, 0, 8), Error);
  CHECK_THROWS_AS((void)proto::stratified_indices(0, 100, 20, 0), Error);
  CHECK_THROWS_AS((void)proto::stratified_indices(50, 50, 1, 1), Error);
}

TEST_CASE("grid search scores every point and picks the argmax") {
  const ds::TimeSeriesFrame frame = signal_frame(120, 7);
  const proto::ProtocolConfig config = small_config();
  const std::size_t end = frame.rows() / 2;
  const auto result =
      proto::grid_search(frame, ArchKind::HybridCfc, 0, end, config);

  REQUIRE(result.scores.size() == 2);  // 1 hidden x 2 lrs x 1 batch
  CHECK(result.scores[0].config.learning_rate == 1e-2);
  CHECK(result.scores[1].config.learning_rate == 5e-3);
  for (const auto& s : result.scores) {
    CHECK(s.config.hidden == 2);
    CHECK(s.config.batch_size == 8);
    REQUIRE(s.val_pearson.has_value());
    CHECK(std::abs(*s.val_pearson) <= 1.0 + 1e-12);
  }

  // re-derive the winner with the documented preference order
  const proto::ConfigScore* best = nullptr;
  for (const auto& s : result.scores) {
    if (!s.val_pearson) continue;
    if (!best || *s.val_pearson > *best->val_pearson) best = &s;
  }
  REQUIRE(best != nullptr);
  CHECK(result.val_pearson == *best->val_pearson);
  CHECK(result.best.hidden == best->config.hidden);
  CHECK(result.best.learning_rate == best->config.learning_rate);
  CHECK(result.best.batch_size == best->config.batch_size);

  // nothing outside the tuning range is ever touched; the deepest read is
  // the last validation target at end - 1
  CHECK(result.audit.max_row == end - 1);

  // the convenience wrapper is the same search over the first half
  const auto tuned = proto::tune(frame, ArchKind::HybridCfc, config);
  CHECK(tuned.val_pearson == result.val_pearson);
  CHECK(tuned.best.learning_rate == result.best.learning_rate);

  // determinism: bitwise-identical scores on a rerun
  const auto again =
      proto::grid_search(frame, ArchKind::HybridCfc, 0, end, config);
  for (std::size_t i = 0; i < result.scores.size(); ++i) {
    CHECK(*again.scores[i].val_pearson == *result.scores[i].val_pearson);
  }
}

TEST_CASE("grid search with constant validation targets has no valid config") {
  ds::TimeSeriesFrame frame = testsup::make_planted_linear_frame(90);
  const auto ret = static_cast<Eigen::Index>(frame.column(ds::kSpotReturn));
  const auto lag = static_cast<Eigen::Index>(frame.column(ds::kLagReturn));
  frame.values.col(ret).setConstant(0.5);
  frame.values.col(lag).setConstant(0.5);
  proto::ProtocolConfig config = small_config();
  config.learning_rates = {1e-2};
  config.tuning_epochs = 1;
  try {
    (void)proto::grid_search(frame, ArchKind::Lstm, 0, 45, config);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoValidConfig);
  }
}

TEST_CASE("grid search range validation") {
  const ds::TimeSeriesFrame frame = signal_frame(60, 3);
  const proto::ProtocolConfig config = small_config();
  try {
    (void)proto::grid_search(frame, ArchKind::Lstm, 5, 6, config);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateSplit);
  }
  CHECK_THROWS_AS(
      (void)proto::grid_search(frame, ArchKind::Lstm, 0, frame.rows() + 5,
                               config),
      Error);
}

TEST_CASE("expanding-window evaluation: anchors, records, and no leakage") {
  const ds::TimeSeriesFrame frame = signal_frame(142, 11);
  REQUIRE(frame.rows() == 140);
  const proto::ProtocolConfig config = small_config();
  proto::ChosenConfig chosen{2, 1e-2, 16};

  const auto result =
      proto::expanding_window_eval(frame, ArchKind::HybridCfc, chosen, config);

  // span [70, 139) in 2 bins of 35 and 34, endpoints from each
  const std::vector<std::size_t> anchors{70, 104, 105, 138};
  REQUIRE(result.records.size() == 4);
  CHECK(result.diagnostics.failures.empty());
  REQUIRE(result.diagnostics.max_row_read.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& rec = result.records[i];
    CHECK(rec.row == anchors[i] + 1);  // chronological order preserved here
    CHECK(rec.date == frame.dates[rec.row]);
    CHECK(rec.actual == ds::return_at(frame, rec.row));
    CHECK(std::isfinite(rec.predicted));
    // the model may never read the target row or beyond
    CHECK(result.diagnostics.max_row_read[i] == anchors[i]);
    CHECK(result.diagnostics.max_row_read[i] < rec.row);
  }
  CHECK(result.diagnostics.audit.max_row == 138);
}

TEST_CASE("expanding-window evaluation is thread-count invariant") {
  const ds::TimeSeriesFrame frame = signal_frame(142, 11);
  proto::ProtocolConfig config = small_config();
  proto::ChosenConfig chosen{2, 1e-2, 16};
  config.jobs = 1;
  const auto serial =
      proto::expanding_window_eval(frame, ArchKind::StrictCfc, chosen, config);
  config.jobs = 3;
  const auto threaded =
      proto::expanding_window_eval(frame, ArchKind::StrictCfc, chosen, config);
  REQUIRE(serial.records.size() == threaded.records.size());
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    CHECK(serial.records[i].row == threaded.records[i].row);
    CHECK(serial.records[i].predicted == threaded.records[i].predicted);
  }
}

TEST_CASE("evaluation reports AllIndicesFailed when no anchor can train") {
  ds::TimeSeriesFrame frame = signal_frame(142, 11);
  for (const auto& name : ds::feature_columns(frame, ArchKind::HybridCfc)) {
    frame.values.col(static_cast<Eigen::Index>(frame.column(name)))
        .setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  const proto::ProtocolConfig config = small_config();
  proto::ChosenConfig chosen{2, 1e-2, 16};
  try {
    (void)proto::expanding_window_eval(frame, ArchKind::HybridCfc, chosen,
                                       config);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllIndicesFailed);
  }
}

TEST_CASE("evaluation refuses a frame too short for its span") {
  const ds::TimeSeriesFrame frame = signal_frame(12, 5);
  proto::ProtocolConfig config = small_config();
  config.window_len = 8;
  proto::ChosenConfig chosen{2, 1e-2, 8};
  try {
    (void)proto::expanding_window_eval(frame, ArchKind::Lstm, chosen, config);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SpanTooShort);
  }
}
