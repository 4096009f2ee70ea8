#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "liquidcast/dataset.hpp"
#include "liquidcast/forecast.hpp"

namespace liquidcast::baseline {

// Rolling-window linear forecaster. For each target row t it refits an
// ordinary least-squares model on the most recent `window` (actual, regressor)
// pairs and predicts the next return. The regressor vector for a pair whose
// target is row s is [1, return at row s-1, features at row s-1], so every
// value the fit touches predates the forecast target.
struct BaselineConfig {
  std::size_t window = dataset::kWindow;
  // Feature columns read alongside the lagged return. Empty means every
  // feature column except the materialized return lag (which would shadow the
  // explicit lagged-return regressor's role).
  std::vector<std::string> feature_names;
};

// Produces one forecast per row t in [window, rows). The first fit has
// window-1 pairs (a pair needs a predecessor row), every later fit has
// exactly `window`. If `audit` is given, every row the fits and forecast
// regressors read is noted; realized targets stored in the records are
// bookkeeping and are read outside the audit.
std::vector<ForecastRecord> rolling_forecast(
    const dataset::TimeSeriesFrame& frame, const BaselineConfig& config,
    dataset::RowAudit* audit = nullptr);

}  // namespace liquidcast::baseline
