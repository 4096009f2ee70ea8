#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "liquidcast/errors.hpp"

namespace liquidcast::bootstrap {

/// Data-driven moving-block length:
///   l = max(5, min(l_acf + 2, floor(N/10)))
/// where l_acf is the largest lag (up to floor(N/10)) at which the sample
/// autocorrelation of the residuals exceeds 1/sqrt(N) in magnitude, or 0 when
/// no lag does (including the zero-variance case).
/// @throws Error{TooFewResiduals} when fewer than 10 residuals are given.
[[nodiscard]] std::size_t block_length(std::span<const double> residuals);

/// A resampled (y, y_hat) series; rows stay paired.
struct PairSample {
  std::vector<double> y;
  std::vector<double> y_hat;
};

/// Moving-block bootstrap resample: ceil(N / block_len) blocks of consecutive
/// pairs with uniformly random starts, wrapping past the end, concatenated
/// and truncated to length N. Deterministic in `seed`.
/// @throws Error{EmptyPairs}    when the input is empty or lengths differ.
/// @throws Error{ShapeMismatch} when block_len is 0 or exceeds N.
[[nodiscard]] PairSample mbb_resample(std::span<const double> y,
                                      std::span<const double> y_hat,
                                      std::size_t block_len,
                                      std::uint64_t seed);

struct MetricSummary {
  std::string metric;
  double mean{0.0};
  double sd{0.0};  ///< sample standard deviation over defined replicates
  double ci_low{0.0};   ///< 2.5th percentile
  double ci_high{0.0};  ///< 97.5th percentile
  std::size_t undefined_replicates{0};  ///< excluded from the aggregates
};

struct BootstrapReport {
  std::size_t replications{0};
  std::size_t block_len{0};
  std::vector<MetricSummary> metrics;  ///< pearson_r, spearman_rho,
                                       ///< directional_accuracy, r_squared,
                                       ///< rmse, mae — in this order
};

/// Block-bootstrap distribution of the six point metrics over `replications`
/// resamples of the forecast pairs. Replicates where a correlation metric is
/// undefined are excluded from that metric's aggregates and counted.
/// Replicate r uses a seed derived from (seed, r), so results are independent
/// of `jobs`.
/// @throws Error{EmptyPairs}      when the series are empty or lengths differ.
/// @throws Error{TooFewResiduals} via block_length when N < 10.
/// @throws Error{BadConfig}       when replications == 0.
[[nodiscard]] BootstrapReport bootstrap_metrics(std::span<const double> y,
                                                std::span<const double> y_hat,
                                                std::size_t replications,
                                                std::uint64_t seed,
                                                unsigned jobs = 1);

/// Percentile (0..100) with linear interpolation between order statistics.
/// @throws Error{EmptyPairs} when values is empty.
[[nodiscard]] double percentile(std::span<const double> values, double p);

}  // namespace liquidcast::bootstrap
