#include "liquidcast/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "liquidcast/metrics.hpp"
#include "liquidcast/numerics.hpp"
#include "liquidcast/parallel.hpp"
#include "liquidcast/rng.hpp"

namespace liquidcast::bootstrap {

namespace {

constexpr std::uint64_t kReplicateStream = 0x6d6262ULL;  // per-replicate seeds

double sorted_percentile(const std::vector<double>& sorted, double p) {
  const double h = (p / 100.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

MetricSummary summarize(std::string name, const std::vector<double>& values,
                        std::size_t replications) {
  MetricSummary s;
  s.metric = std::move(name);
  s.undefined_replicates = replications - values.size();
  if (values.empty()) {
    s.mean = s.sd = s.ci_low = s.ci_high =
        std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  s.mean = mean;
  s.sd = values.size() > 1
             ? std::sqrt(ss / static_cast<double>(values.size() - 1))
             : 0.0;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  s.ci_low = sorted_percentile(sorted, 2.5);
  s.ci_high = sorted_percentile(sorted, 97.5);
  return s;
}

}  // namespace

std::size_t block_length(std::span<const double> residuals) {
  const std::size_t n = residuals.size();
  if (n < 10) {
    throw Error(ErrorCode::TooFewResiduals,
                "block length needs at least 10 residuals");
  }
  const std::size_t cap = n / 10;
  std::size_t l_acf = 0;
  try {
    const std::vector<double> rho = numerics::acf(residuals, cap);
    const double threshold = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t lag = 1; lag <= cap; ++lag) {
      if (std::fabs(rho[lag - 1]) > threshold) l_acf = lag;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSeries) throw;
    // zero-variance residuals carry no autocorrelation structure
  }
  return std::max<std::size_t>(5, std::min(l_acf + 2, cap));
}

PairSample mbb_resample(std::span<const double> y,
                        std::span<const double> y_hat, std::size_t block_len,
                        std::uint64_t seed) {
  const std::size_t n = y.size();
  if (n == 0 || y_hat.size() != n) {
    throw Error(ErrorCode::EmptyPairs,
                "paired series must be nonempty and equal length");
  }
  if (block_len == 0 || block_len > n) {
    throw Error(ErrorCode::ShapeMismatch,
                "block length must lie in [1, N]");
  }
  Rng rng(seed);
  PairSample out;
  out.y.reserve(n);
  out.y_hat.reserve(n);
  while (out.y.size() < n) {
    const std::size_t start = static_cast<std::size_t>(rng.below(n));
    for (std::size_t j = 0; j < block_len && out.y.size() < n; ++j) {
      const std::size_t idx = (start + j) % n;
      out.y.push_back(y[idx]);
      out.y_hat.push_back(y_hat[idx]);
    }
  }
  return out;
}

BootstrapReport bootstrap_metrics(std::span<const double> y,
                                  std::span<const double> y_hat,
                                  std::size_t replications, std::uint64_t seed,
                                  unsigned jobs) {
  const std::size_t n = y.size();
  if (n == 0 || y_hat.size() != n) {
    throw Error(ErrorCode::EmptyPairs,
                "paired series must be nonempty and equal length");
  }
  if (replications == 0) {
    throw Error(ErrorCode::BadConfig, "need at least one replication");
  }
  std::vector<double> residuals(n);
  for (std::size_t i = 0; i < n; ++i) residuals[i] = y[i] - y_hat[i];
  const std::size_t block = block_length(residuals);

  std::vector<metrics::MetricsReport> reports(replications);
  parallel_for(replications, jobs, [&](std::size_t r) {
    const PairSample sample =
        mbb_resample(y, y_hat, block,
                     derive_seed(seed, kReplicateStream, r));
    reports[r] = metrics::compute_metrics(sample.y, sample.y_hat);
  });

  BootstrapReport out;
  out.replications = replications;
  out.block_len = block;
  auto collect = [&](const char* name, auto&& getter) {
    std::vector<double> values;
    values.reserve(replications);
    for (const metrics::MetricsReport& r : reports) {
      if (const std::optional<double> v = getter(r)) values.push_back(*v);
    }
    out.metrics.push_back(summarize(name, values, replications));
  };
  using metrics::MetricsReport;
  collect("pearson_r", [](const MetricsReport& r) { return r.pearson_r; });
  collect("spearman_rho",
          [](const MetricsReport& r) { return r.spearman_rho; });
  collect("directional_accuracy", [](const MetricsReport& r) {
    return std::optional<double>(r.directional_accuracy);
  });
  collect("r_squared", [](const MetricsReport& r) { return r.r_squared; });
  collect("rmse", [](const MetricsReport& r) {
    return std::optional<double>(r.rmse);
  });
  collect("mae", [](const MetricsReport& r) {
    return std::optional<double>(r.mae);
  });
  return out;
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) {
    throw Error(ErrorCode::EmptyPairs, "percentile of an empty sample");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double clamped = std::clamp(p, 0.0, 100.0);
  return sorted_percentile(sorted, clamped);
}

}  // namespace liquidcast::bootstrap
