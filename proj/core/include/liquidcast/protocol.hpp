#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "liquidcast/cells.hpp"
#include "liquidcast/dataset.hpp"
#include "liquidcast/forecast.hpp"
#include "liquidcast/training.hpp"

namespace liquidcast::protocol {

using cells::ArchKind;

// Seed streams feeding derive_seed so tuning and evaluation draw from
// unrelated deterministic sequences.
inline constexpr std::uint64_t kTuneStream = 0x74756e65;  // "tune"
inline constexpr std::uint64_t kEvalStream = 0x6576616c;  // "eval"

struct ProtocolConfig {
  std::size_t window_len = dataset::kWindow;  // sequence length fed to cells
  std::vector<int> hidden_sizes = {4, 8, 12};
  std::vector<double> learning_rates = {5e-3, 1e-3};
  std::vector<int> batch_sizes = {32, 64};
  int tuning_epochs = 30;
  int final_epochs = 50;
  double weight_decay = 1e-5;
  double clip_norm = 1.0;
  std::size_t strata = 20;       // bins across the evaluation span
  std::size_t per_stratum = 8;   // indices drawn per bin
  std::uint64_t seed = 0;        // master seed, split per config / per index
  unsigned jobs = 1;             // worker threads for the evaluation loop
};

struct ChosenConfig {
  int hidden = 0;
  double learning_rate = 0.0;
  int batch_size = 0;
};

struct ConfigScore {
  ChosenConfig config;
  std::optional<double> val_pearson;  // empty when training or scoring failed
  std::string failure;                // diagnostic for an empty score
};

struct GridSearchResult {
  ChosenConfig best;
  double val_pearson = 0.0;
  std::vector<ConfigScore> scores;  // grid order
  dataset::RowAudit audit;          // every frame row the search read
};

// Trains every grid point on the leading 80% of [tuning_begin, tuning_end)
// and scores it by Pearson correlation on held-out targets in the trailing
// 20%. The scaler is fit on the training portion only. Ties prefer the
// smaller hidden size, then the larger batch, then grid order.
GridSearchResult grid_search(const dataset::TimeSeriesFrame& frame,
                             ArchKind arch, std::size_t tuning_begin,
                             std::size_t tuning_end,
                             const ProtocolConfig& config);

// grid_search over the first half of the frame (rows [0, floor(rows/2))).
GridSearchResult tune(const dataset::TimeSeriesFrame& frame, ArchKind arch,
                      const ProtocolConfig& config);

// Deterministic stratified draw: [span_begin, span_end) is cut into `strata`
// contiguous bins (earlier bins absorb the remainder), and each bin
// contributes `per_stratum` evenly spaced indices. Throws SpanTooShort when
// the span cannot host strata*per_stratum distinct indices.
std::vector<std::size_t> stratified_indices(std::size_t span_begin,
                                            std::size_t span_end,
                                            std::size_t strata,
                                            std::size_t per_stratum);

struct IndexFailure {
  std::size_t position = 0;  // index into the stratified draw
  std::size_t t_eval = 0;    // frame row the model was anchored at
  std::string message;
};

struct EvalDiagnostics {
  dataset::RowAudit audit;                  // union over all indices
  std::vector<std::size_t> max_row_read;    // per index, kNone when failed
  std::vector<IndexFailure> failures;
};

struct EvalResult {
  std::vector<ForecastRecord> records;  // chronological, failures omitted
  EvalDiagnostics diagnostics;
};

// Expanding-window evaluation. Anchors t_eval are drawn with
// stratified_indices over [max(floor(rows/2), window_len + 1), rows - 1);
// each anchor refits the scaler and retrains a freshly initialized model on
// every sample whose target lies at or before t_eval, then predicts the
// return at t_eval + 1. Failed anchors are recorded in the diagnostics; all
// anchors failing raises AllIndicesFailed.
EvalResult expanding_window_eval(const dataset::TimeSeriesFrame& frame,
                                 ArchKind arch, const ChosenConfig& chosen,
                                 const ProtocolConfig& config);

}  // namespace liquidcast::protocol
