#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "liquidcast/errors.hpp"

namespace liquidcast::numerics {

/// Dense double matrix, row-major so that a row (one observation, one window
/// step) is contiguous in memory.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Ridge floor added to the normal-equations diagonal. Keeps the solve defined
/// even when there are fewer rows than columns (the rolling baseline fits up
/// to 30 rows against a wider regressor block).
inline constexpr double kRidgeFloor = 1e-10;

/// Standard-deviation floor used when standardizing; columns with tiny or zero
/// spread map to zero instead of exploding.
inline constexpr double kStdFloor = 1e-8;

/// Least-squares coefficients for X beta ~= y via the normal equations with a
/// ridge floor of 1e-10 on the diagonal.
///
/// @throws Error{ShapeMismatch}   when rows(X) != len(y) or X is empty.
/// @throws Error{SingularSystem}  when the regularized system still cannot be
///                                solved to a finite solution.
[[nodiscard]] Vector solve_least_squares(const Matrix& x, const Vector& y);

/// Per-column affine map to zero mean and unit sample standard deviation.
/// Standard deviations are floored at 1e-8, which sends constant columns to
/// exactly zero. Fitting never sees rows outside the matrix it is given;
/// callers are responsible for passing training rows only.
struct Standardizer {
  Vector means;
  Vector stds;  ///< floored sample standard deviations (ddof = 1)

  [[nodiscard]] Eigen::Index dim() const noexcept { return means.size(); }

  /// Transformed copy of `x` (must have dim() columns).
  [[nodiscard]] Matrix apply(const Matrix& x) const;

  /// Transformed copy of a single row vector.
  [[nodiscard]] Vector apply_row(const Vector& row) const;
};

/// Fit a Standardizer on the rows of `x`.
/// @throws Error{ShapeMismatch} when `x` has no rows.
[[nodiscard]] Standardizer fit_standardizer(const Matrix& x);

/// Sample autocorrelation at lags 1..max_lag (index 0 of the result is lag 1):
/// rho(l) = sum_{t=l}((x_t - mean)(x_{t-l} - mean)) / sum((x_t - mean)^2).
///
/// @throws Error{ShapeMismatch}     when max_lag < 1 or len <= max_lag.
/// @throws Error{DegenerateSeries}  when the series has zero variance.
[[nodiscard]] std::vector<double> acf(std::span<const double> series,
                                      std::size_t max_lag);

/// Ranks 1..n with ties assigned the average of the positions they occupy.
/// @throws Error{ShapeMismatch} when the input is empty.
[[nodiscard]] std::vector<double> rank_transform(std::span<const double> values);

}  // namespace liquidcast::numerics
