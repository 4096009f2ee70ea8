#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "liquidcast/errors.hpp"

namespace liquidcast::metrics {

/// Point metrics of a forecast series against realized values. Correlation
/// metrics and R^2 are empty when undefined (zero variance in an input, or a
/// zero total sum of squares); the remaining metrics are always present.
struct MetricsReport {
  std::size_t n{0};
  std::optional<double> pearson_r;
  std::optional<double> spearman_rho;  ///< Pearson on average-tie ranks
  double directional_accuracy{0.0};    ///< percent of matching sign categories
  std::optional<double> r_squared;     ///< 1 - SSE/SST, unbounded below
  double rmse{0.0};
  double mae{0.0};
};

/// @throws Error{ShapeMismatch} when lengths differ or n < 2.
[[nodiscard]] MetricsReport compute_metrics(std::span<const double> y,
                                            std::span<const double> y_hat);

struct BiasReport {
  std::size_t n{0};
  double mean_error{0.0};  ///< mean of y - y_hat
  double t_stat{0.0};
  double p_value{1.0};  ///< two-sided Student-t, n-1 degrees of freedom
};

/// One-sample t-test of the forecast errors e = y - y_hat against zero mean.
/// @throws Error{ShapeMismatch}       when lengths differ or n < 2.
/// @throws Error{ZeroVarianceErrors}  when the errors have zero variance.
[[nodiscard]] BiasReport bias_test(std::span<const double> y,
                                   std::span<const double> y_hat);

/// Regularized incomplete beta function I_x(a, b), a,b > 0, x in [0, 1].
[[nodiscard]] double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided Student-t p-value for a statistic t with `dof` degrees of
/// freedom, computed through the regularized incomplete beta function.
[[nodiscard]] double student_t_two_sided_p(double t, double dof);

}  // namespace liquidcast::metrics
