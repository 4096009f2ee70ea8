#include "liquidcast/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace liquidcast::numerics {

Vector solve_least_squares(const Matrix& x, const Vector& y) {
  if (x.rows() == 0 || x.cols() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "empty design matrix");
  }
  if (x.rows() != y.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "design matrix rows do not match target length");
  }
  Eigen::MatrixXd normal = x.transpose() * x;
  normal.diagonal().array() += kRidgeFloor;
  const Eigen::VectorXd rhs = x.transpose() * y;
  if (!normal.allFinite() || !rhs.allFinite()) {
    throw Error(ErrorCode::SingularSystem,
                "normal equations contain non-finite entries");
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "LDLT factorization failed");
  }
  Vector beta = ldlt.solve(rhs);
  if (!beta.allFinite()) {
    throw Error(ErrorCode::SingularSystem,
                "system rank-deficient beyond the regularization floor");
  }
  return beta;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != dim()) {
    throw Error(ErrorCode::ShapeMismatch,
                "standardizer dimension does not match matrix columns");
  }
  Matrix out = x;
  out.rowwise() -= means.transpose();
  out.array().rowwise() /= stds.transpose().array();
  return out;
}

Vector Standardizer::apply_row(const Vector& row) const {
  if (row.size() != dim()) {
    throw Error(ErrorCode::ShapeMismatch,
                "standardizer dimension does not match row length");
  }
  return (row - means).cwiseQuotient(stds);
}

Standardizer fit_standardizer(const Matrix& x) {
  if (x.rows() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "cannot fit standardizer on 0 rows");
  }
  const auto n = static_cast<double>(x.rows());
  Standardizer s;
  s.means = x.colwise().mean();
  if (x.rows() == 1) {
    s.stds = Vector::Constant(x.cols(), kStdFloor);
    return s;
  }
  s.stds.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var =
        (x.col(c).array() - s.means[c]).square().sum() / (n - 1.0);
    s.stds[c] = std::max(std::sqrt(var), kStdFloor);
  }
  return s;
}

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
  if (max_lag < 1 || series.size() <= max_lag) {
    throw Error(ErrorCode::ShapeMismatch,
                "series must be longer than the largest requested lag");
  }
  const std::size_t n = series.size();
  const double mean =
      std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double denom = 0.0;
  for (double v : series) denom += (v - mean) * (v - mean);
  if (denom <= 0.0) {
    throw Error(ErrorCode::DegenerateSeries,
                "autocorrelation of a zero-variance series");
  }
  std::vector<double> rho(max_lag);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double num = 0.0;
    for (std::size_t t = lag; t < n; ++t) {
      num += (series[t] - mean) * (series[t - lag] - mean);
    }
    rho[lag - 1] = num / denom;
  }
  return rho;
}

std::vector<double> rank_transform(std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "cannot rank an empty vector");
  }
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return values[a] < values[b];
                   });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share one value; ranks are 1-based
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t p = i; p <= j; ++p) ranks[order[p]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace liquidcast::numerics
