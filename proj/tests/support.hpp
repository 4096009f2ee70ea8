#pragma once

// Shared fixtures for the test suite: deterministic parameter/input fills
// (mirrored by the independent reference implementations that produced the
// frozen expected values), synthetic frame builders, and a temp-dir guard.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "liquidcast/cells.hpp"
#include "liquidcast/dataset.hpp"
#include "liquidcast/rng.hpp"

namespace testsup {

using liquidcast::cells::ArchKind;
using liquidcast::cells::ModelParams;
using liquidcast::dataset::TimeSeriesFrame;
using liquidcast::numerics::Matrix;

// Exact dyadic rationals: integer arithmetic plus division by a power of two,
// so every value is bit-identical in any IEEE-754 implementation.
inline double pattern(int base, int i) {
  return (((base + 3 * i) % 17) - 8) / 16.0;
}

inline double xpat(int i) { return ((5 + 7 * i) % 13 - 6) / 8.0; }

// Fills every parameter array, in its canonical order, with pattern(101*k, i).
inline void fill_params(ModelParams& p) {
  const auto arrays = liquidcast::cells::param_arrays(p);
  for (std::size_t k = 0; k < arrays.size(); ++k) {
    for (std::size_t i = 0; i < arrays[k].size; ++i) {
      arrays[k].data[i] = pattern(static_cast<int>(101 * k), static_cast<int>(i));
    }
  }
}

inline Matrix make_window(int rows, int cols) {
  Matrix w(rows, cols);
  for (int t = 0; t < rows; ++t) {
    for (int j = 0; j < cols; ++j) w(t, j) = xpat(t * cols + j);
  }
  return w;
}

// Bitwise equality across every parameter array of two same-shaped models.
inline bool params_equal(const ModelParams& a, const ModelParams& b) {
  const auto xs = liquidcast::cells::param_arrays(a);
  const auto ys = liquidcast::cells::param_arrays(b);
  if (xs.size() != ys.size()) return false;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (xs[k].size != ys[k].size) return false;
    for (std::size_t i = 0; i < xs[k].size; ++i) {
      if (xs[k].data[i] != ys[k].data[i]) return false;
    }
  }
  return true;
}

// Raw price frame (price + one driving feature) whose return series carries a
// planted nonlinear signal: R_t = amp * tanh(1.5 * Sig_{t-1}) + noise.
// Feed through compute_returns to obtain the canonical frame. Dates skip two
// extra days every fifth row, so calendar gaps are nontrivial.
inline TimeSeriesFrame make_signal_price_frame(std::size_t rows,
                                               std::uint64_t seed,
                                               double noise_scale,
                                               double amp = 1.0) {
  liquidcast::Rng rng(seed);
  TimeSeriesFrame frame;
  frame.columns = {liquidcast::dataset::kSpotPrice, "Sig"};
  frame.values.resize(static_cast<Eigen::Index>(rows), 2);
  frame.dates.resize(rows);
  std::int64_t day = 16436;  // 2015-01-01
  double sig = 0.0, price = 100.0, prev_sig = 0.0;
  for (std::size_t t = 0; t < rows; ++t) {
    frame.dates[t] = day;
    day += (t % 5 == 4) ? 3 : 1;
    if (t > 0) {
      const double r =
          amp * std::tanh(1.5 * prev_sig) + noise_scale * rng.normal();
      price *= 1.0 + r / 100.0;
    }
    prev_sig = sig;
    frame.values(static_cast<Eigen::Index>(t), 0) = price;
    frame.values(static_cast<Eigen::Index>(t), 1) = sig;
    sig = 0.9 * sig + 0.3 * rng.normal();
  }
  return frame;
}

// Canonical frame whose return column obeys an exact linear law
//   R_t = alpha + beta * R_{t-1} + g1 * Z1_{t-1} + g2 * Z2_{t-1}
// with exogenous dyadic features. Gaps are all 1.
inline TimeSeriesFrame make_planted_linear_frame(std::size_t rows) {
  namespace ds = liquidcast::dataset;
  constexpr double alpha = 0.05, beta = 0.5, g1 = 0.3, g2 = -0.2;
  TimeSeriesFrame frame;
  frame.columns = {ds::kSpotPrice, ds::kSpotReturn, ds::kAr1SpotPrice,
                   ds::kLagReturn, "Z1", "Z2"};
  frame.values.resize(static_cast<Eigen::Index>(rows), 6);
  frame.dates.resize(rows);
  frame.gaps.assign(rows, 1.0);
  auto z1 = [](std::size_t t) { return ((2 + 5 * t) % 9 - 4.0) / 4.0; };
  auto z2 = [](std::size_t t) { return ((1 + 3 * t) % 7 - 3.0) / 2.0; };
  double r_prev = 0.1, r_lag = 0.0, price = 100.0, price_prev = 100.0;
  for (std::size_t t = 0; t < rows; ++t) {
    const auto i = static_cast<Eigen::Index>(t);
    frame.dates[t] = 16436 + static_cast<std::int64_t>(t);
    double r = r_prev;
    if (t > 0) {
      r = alpha + beta * r_prev + g1 * z1(t - 1) + g2 * z2(t - 1);
      price_prev = price;
      price *= 1.0 + r / 100.0;
      r_lag = r_prev;
      r_prev = r;
    }
    frame.values(i, 0) = price;
    frame.values(i, 1) = r;
    frame.values(i, 2) = price_prev;
    frame.values(i, 3) = r_lag;
    frame.values(i, 4) = z1(t);
    frame.values(i, 5) = z2(t);
  }
  return frame;
}

class TempDir {
 public:
  TempDir() {
    char buf[] = "/tmp/lqc_test_XXXXXX";
    if (!::mkdtemp(buf)) std::abort();
    path_ = buf;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] std::string file(const std::string& name) const {
    return path_ + "/" + name;
  }

 private:
  std::string path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) std::abort();
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

}  // namespace testsup
