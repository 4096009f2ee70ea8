#include "liquidcast/metrics.hpp"

#include <cmath>
#include <vector>

#include "liquidcast/numerics.hpp"

namespace liquidcast::metrics {

namespace {

void check_pair(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) {
    throw Error(ErrorCode::ShapeMismatch, "series lengths differ");
  }
  if (y.size() < 2) {
    throw Error(ErrorCode::ShapeMismatch, "need at least two observations");
  }
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::optional<double> pearson(std::span<const double> a,
                              std::span<const double> b) {
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

int sign_category(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

/// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCode::BadConfig, "beta parameters must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) {
    throw Error(ErrorCode::BadConfig, "degrees of freedom must be positive");
  }
  if (!std::isfinite(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return regularized_incomplete_beta(dof / 2.0, 0.5, x);
}

MetricsReport compute_metrics(std::span<const double> y,
                              std::span<const double> y_hat) {
  check_pair(y, y_hat);
  const std::size_t n = y.size();
  MetricsReport r;
  r.n = n;
  r.pearson_r = pearson(y, y_hat);
  {
    const std::vector<double> ry = numerics::rank_transform(y);
    const std::vector<double> rh = numerics::rank_transform(y_hat);
    r.spearman_rho = pearson(ry, rh);
  }
  {
    std::size_t matches = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sign_category(y[i]) == sign_category(y_hat[i])) ++matches;
    }
    r.directional_accuracy =
        100.0 * static_cast<double>(matches) / static_cast<double>(n);
  }
  {
    const double my = mean_of(y);
    double sse = 0.0, sst = 0.0, sae = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - y_hat[i];
      sse += e * e;
      sae += std::fabs(e);
      sst += (y[i] - my) * (y[i] - my);
    }
    r.rmse = std::sqrt(sse / static_cast<double>(n));
    r.mae = sae / static_cast<double>(n);
    if (sst > 0.0) {
      r.r_squared = 1.0 - sse / sst;
    }
  }
  return r;
}

BiasReport bias_test(std::span<const double> y, std::span<const double> y_hat) {
  check_pair(y, y_hat);
  const std::size_t n = y.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += y[i] - y_hat[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (y[i] - y_hat[i]) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd <= 0.0) {
    throw Error(ErrorCode::ZeroVarianceErrors,
                "bias test requires non-constant errors");
  }
  BiasReport out;
  out.n = n;
  out.mean_error = mean;
  out.t_stat = mean / (sd / std::sqrt(static_cast<double>(n)));
  out.p_value = student_t_two_sided_p(out.t_stat, static_cast<double>(n - 1));
  return out;
}

}  // namespace liquidcast::metrics
