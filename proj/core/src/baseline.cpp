#include "liquidcast/baseline.hpp"

#include <algorithm>

#include "liquidcast/cells.hpp"
#include "liquidcast/numerics.hpp"

namespace liquidcast::baseline {

using cells::ArchKind;
using numerics::Matrix;
using numerics::solve_least_squares;
using numerics::Vector;

std::vector<ForecastRecord> rolling_forecast(
    const dataset::TimeSeriesFrame& frame, const BaselineConfig& config,
    dataset::RowAudit* audit) {
  const std::size_t w = config.window;
  if (w < 2) {
    throw Error(ErrorCode::BadConfig,
                "baseline window must hold at least two pairs");
  }
  const std::size_t n = frame.rows();
  if (n < w + 1) {
    throw Error(ErrorCode::RangeTooShort,
                "frame has " + std::to_string(n) + " rows; the first forecast needs " +
                    std::to_string(w + 1));
  }
  const std::vector<std::string> features =
      config.feature_names.empty()
          ? dataset::feature_columns(frame, ArchKind::CtLtc)
          : config.feature_names;
  std::vector<std::size_t> feature_cols;
  feature_cols.reserve(features.size());
  for (const std::string& name : features) {
    feature_cols.push_back(frame.column(name));
  }
  const std::size_t return_col = frame.column(dataset::kSpotReturn);
  const std::size_t k = 2 + feature_cols.size();  // intercept, lag return, Z

  const auto fill_regressors = [&](Eigen::Ref<Vector> out, std::size_t row) {
    if (audit) audit->note(row);
    out(0) = 1.0;
    out(1) = frame.values(static_cast<Eigen::Index>(row),
                          static_cast<Eigen::Index>(return_col));
    for (std::size_t c = 0; c < feature_cols.size(); ++c) {
      out(static_cast<Eigen::Index>(2 + c)) =
          frame.values(static_cast<Eigen::Index>(row),
                       static_cast<Eigen::Index>(feature_cols[c]));
    }
  };

  std::vector<ForecastRecord> records;
  records.reserve(n - w);
  Vector regressors(static_cast<Eigen::Index>(k));
  for (std::size_t t = w; t < n; ++t) {
    const std::size_t lo = std::max<std::size_t>(t - w, 1);
    const std::size_t pairs = t - lo;
    Matrix x(static_cast<Eigen::Index>(pairs), static_cast<Eigen::Index>(k));
    Vector y(static_cast<Eigen::Index>(pairs));
    for (std::size_t s = lo; s < t; ++s) {
      const auto i = static_cast<Eigen::Index>(s - lo);
      fill_regressors(x.row(i).transpose(), s - 1);
      if (audit) audit->note(s);
      y(i) = frame.values(static_cast<Eigen::Index>(s),
                          static_cast<Eigen::Index>(return_col));
    }
    const Vector beta = solve_least_squares(x, y);
    fill_regressors(regressors, t - 1);
    ForecastRecord rec;
    rec.row = t;
    rec.date = frame.dates[t];
    rec.actual = dataset::return_at(frame, t);
    rec.predicted = beta.dot(regressors);
    records.push_back(rec);
  }
  return records;
}

}  // namespace liquidcast::baseline
