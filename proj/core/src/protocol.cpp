#include "liquidcast/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "liquidcast/metrics.hpp"
#include "liquidcast/parallel.hpp"
#include "liquidcast/rng.hpp"

namespace liquidcast::protocol {

using cells::forward_window;
using cells::init_params;
using cells::ModelParams;
using numerics::fit_standardizer;
using numerics::Standardizer;
using training::train;
using training::TrainConfig;
using training::TrainResult;

namespace {

struct PreparedSplit {
  Standardizer scaler;
  std::vector<SequenceSample> train;
  std::vector<SequenceSample> val;
};

PreparedSplit prepare_tuning_split(const dataset::TimeSeriesFrame& frame,
                                   ArchKind arch, std::size_t begin,
                                   std::size_t end,
                                   const ProtocolConfig& config,
                                   dataset::RowAudit* audit) {
  if (end > frame.rows() || begin >= end) {
    throw Error(ErrorCode::RangeTooShort, "tuning range out of bounds");
  }
  const std::size_t m = end - begin;
  const auto split = begin + static_cast<std::size_t>(
                                 std::floor(0.8 * static_cast<double>(m)));
  if (split <= begin || split >= end) {
    throw Error(ErrorCode::DegenerateSplit,
                "tuning range cannot host an 80/20 split");
  }
  const std::vector<std::string> cols = dataset::feature_columns(frame, arch);
  PreparedSplit out;
  out.scaler = fit_standardizer(
      dataset::feature_matrix(frame, cols, begin, split, audit));
  out.train = dataset::make_samples(frame, arch, out.scaler, begin, split,
                                    config.window_len, audit);
  // Validation windows may reach back into the training region; their
  // targets cover exactly [split, end).
  out.val = dataset::make_samples(frame, arch, out.scaler,
                                  split - config.window_len, end,
                                  config.window_len, audit);
  return out;
}

std::optional<double> validation_pearson(const ModelParams& params,
                                         const std::vector<SequenceSample>& val) {
  std::vector<double> actual, predicted;
  actual.reserve(val.size());
  predicted.reserve(val.size());
  for (const SequenceSample& s : val) {
    actual.push_back(s.target);
    predicted.push_back(forward_window(params, s.window, s.gaps));
  }
  return metrics::compute_metrics(actual, predicted).pearson_r;
}

}  // namespace

GridSearchResult grid_search(const dataset::TimeSeriesFrame& frame,
                             ArchKind arch, std::size_t tuning_begin,
                             std::size_t tuning_end,
                             const ProtocolConfig& config) {
  GridSearchResult result;
  const PreparedSplit split = prepare_tuning_split(
      frame, arch, tuning_begin, tuning_end, config, &result.audit);
  const auto input_dim = static_cast<int>(split.scaler.dim());

  std::size_t config_index = 0;
  bool any = false;
  for (const int hidden : config.hidden_sizes) {
    for (const double lr : config.learning_rates) {
      for (const int batch : config.batch_sizes) {
        ConfigScore score;
        score.config = {hidden, lr, batch};
        const std::uint64_t seed =
            derive_seed(config.seed, kTuneStream, config_index);
        try {
          ModelParams params = init_params(arch, hidden, input_dim, seed);
          TrainConfig tc;
          tc.learning_rate = lr;
          tc.batch_size = batch;
          tc.epochs = config.tuning_epochs;
          tc.weight_decay = config.weight_decay;
          tc.clip_norm = config.clip_norm;
          tc.seed = seed;
          TrainResult trained = train(std::move(params), split.train, tc);
          score.val_pearson = validation_pearson(trained.params, split.val);
          if (!score.val_pearson) {
            score.failure = "validation correlation undefined";
          }
        } catch (const Error& e) {
          score.failure = e.what();
        }

        if (score.val_pearson) {
          const double v = *score.val_pearson;
          const bool better =
              !any || v > result.val_pearson ||
              (v == result.val_pearson &&
               (hidden < result.best.hidden ||
                (hidden == result.best.hidden && batch > result.best.batch_size)));
          if (better) {
            result.best = score.config;
            result.val_pearson = v;
            any = true;
          }
        }
        result.scores.push_back(std::move(score));
        ++config_index;
      }
    }
  }
  if (!any) {
    throw Error(ErrorCode::NoValidConfig,
                "no grid point produced a defined validation correlation");
  }
  return result;
}

GridSearchResult tune(const dataset::TimeSeriesFrame& frame, ArchKind arch,
                      const ProtocolConfig& config) {
  return grid_search(frame, arch, 0, frame.rows() / 2, config);
}

std::vector<std::size_t> stratified_indices(std::size_t span_begin,
                                            std::size_t span_end,
                                            std::size_t strata,
                                            std::size_t per_stratum) {
  if (strata == 0 || per_stratum == 0) {
    throw Error(ErrorCode::BadConfig, "strata and per_stratum must be positive");
  }
  if (span_end <= span_begin ||
      span_end - span_begin < strata * per_stratum) {
    throw Error(ErrorCode::SpanTooShort,
                "span of " + std::to_string(span_end - span_begin) +
                    " rows cannot yield " +
                    std::to_string(strata * per_stratum) +
                    " distinct indices");
  }
  const std::size_t span = span_end - span_begin;
  const std::size_t base = span / strata;
  const std::size_t remainder = span % strata;
  std::vector<std::size_t> out;
  out.reserve(strata * per_stratum);
  std::size_t bin_start = span_begin;
  for (std::size_t b = 0; b < strata; ++b) {
    const std::size_t len = base + (b < remainder ? 1 : 0);
    for (std::size_t j = 0; j < per_stratum; ++j) {
      std::size_t offset;
      if (per_stratum == 1) {
        offset = static_cast<std::size_t>(
            std::llround(0.5 * static_cast<double>(len - 1)));
      } else {
        offset = static_cast<std::size_t>(
            std::llround(static_cast<double>(j) *
                         static_cast<double>(len - 1) /
                         static_cast<double>(per_stratum - 1)));
      }
      out.push_back(bin_start + offset);
    }
    bin_start += len;
  }
  return out;
}

EvalResult expanding_window_eval(const dataset::TimeSeriesFrame& frame,
                                 ArchKind arch, const ChosenConfig& chosen,
                                 const ProtocolConfig& config) {
  const std::size_t n = frame.rows();
  const std::size_t span_begin =
      std::max(n / 2, config.window_len + 1);
  if (n < 2 || span_begin >= n - 1) {
    throw Error(ErrorCode::SpanTooShort, "frame too short for evaluation");
  }
  const std::vector<std::size_t> anchors = stratified_indices(
      span_begin, n - 1, config.strata, config.per_stratum);
  const std::vector<std::string> cols = dataset::feature_columns(frame, arch);

  struct Slot {
    std::optional<ForecastRecord> record;
    dataset::RowAudit audit;
    std::size_t max_row = dataset::RowAudit::kNone;
    std::string failure;
  };
  std::vector<Slot> slots(anchors.size());

  parallel_for(anchors.size(), config.jobs, [&](std::size_t i) {
    Slot& slot = slots[i];
    const std::size_t t_eval = anchors[i];
    const std::uint64_t seed = derive_seed(config.seed, kEvalStream, i);
    try {
      dataset::RowAudit& audit = slot.audit;
      const Standardizer scaler = fit_standardizer(
          dataset::feature_matrix(frame, cols, 0, t_eval + 1, &audit));
      const std::vector<SequenceSample> samples =
          dataset::make_samples(frame, arch, scaler, 0, t_eval + 1,
                                config.window_len, &audit);
      ModelParams params = init_params(
          arch, chosen.hidden, static_cast<int>(scaler.dim()), seed);
      TrainConfig tc;
      tc.learning_rate = chosen.learning_rate;
      tc.batch_size = chosen.batch_size;
      tc.epochs = config.final_epochs;
      tc.weight_decay = config.weight_decay;
      tc.clip_norm = config.clip_norm;
      tc.seed = seed;
      const TrainResult trained = train(std::move(params), samples, tc);
      const SequenceSample window = dataset::make_forecast_window(
          frame, arch, scaler, t_eval, config.window_len, &audit);
      ForecastRecord rec;
      rec.row = t_eval + 1;
      rec.date = frame.dates[t_eval + 1];
      rec.actual = dataset::return_at(frame, t_eval + 1);
      rec.predicted = forward_window(trained.params, window.window, window.gaps);
      slot.record = rec;
      slot.max_row = audit.max_row;
    } catch (const Error& e) {
      slot.failure = e.what();
    }
  });

  EvalResult result;
  result.diagnostics.max_row_read.reserve(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    Slot& slot = slots[i];
    result.diagnostics.audit.merge(slot.audit);
    result.diagnostics.max_row_read.push_back(slot.max_row);
    if (slot.record) {
      result.records.push_back(*slot.record);
    } else {
      result.diagnostics.failures.push_back({i, anchors[i], slot.failure});
    }
  }
  if (result.records.empty()) {
    throw Error(ErrorCode::AllIndicesFailed,
                "every evaluation anchor failed; first failure: " +
                    (result.diagnostics.failures.empty()
                         ? std::string("none recorded")
                         : result.diagnostics.failures.front().message));
  }
  std::sort(result.records.begin(), result.records.end(),
            [](const ForecastRecord& a, const ForecastRecord& b) {
              return a.row < b.row;
            });
  return result;
}

}  // namespace liquidcast::protocol
