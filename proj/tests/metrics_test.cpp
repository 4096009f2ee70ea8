#include <cmath>
#include <vector>

#include "doctest.h"
#include "liquidcast/errors.hpp"
#include "liquidcast/metrics.hpp"
#include "liquidcast/numerics.hpp"
#include "liquidcast/rng.hpp"

using liquidcast::Error;
using liquidcast::ErrorCode;
using liquidcast::Rng;
using namespace liquidcast::metrics;

namespace {
const std::vector<double> kY{0.5, -1.2, 0.3, 2.0, -0.7, 1.1};
const std::vector<double> kYhat{0.4, -1.0, -0.2, 1.5, -0.9, 0.8};
}  // namespace

TEST_CASE("report matches independently computed reference values") {
  const MetricsReport r = compute_metrics(kY, kYhat);
  CHECK(r.n == 6);
  REQUIRE(r.pearson_r.has_value());
  CHECK(*r.pearson_r == doctest::Approx(0.9838886454372281).epsilon(1e-12));
  REQUIRE(r.spearman_rho.has_value());
  CHECK(*r.spearman_rho == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.directional_accuracy ==
        doctest::Approx(83.33333333333334).epsilon(1e-12));
  REQUIRE(r.r_squared.has_value());
  CHECK(*r.r_squared == doctest::Approx(0.9001956947162426).epsilon(1e-12));
  CHECK(r.rmse == doctest::Approx(0.3366501646120693).epsilon(1e-12));
  CHECK(r.mae == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("perfect forecasts score perfectly") {
  const MetricsReport r = compute_metrics(kY, kY);
  CHECK(*r.pearson_r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*r.spearman_rho == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.directional_accuracy == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(*r.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.rmse == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.mae == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("sign-flipped forecasts invert correlations") {
  std::vector<double> y = kY;
  double mean = 0.0;
  for (const double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  for (double& v : y) v -= mean;  // exact mean zero makes R^2 = -3 exact
  std::vector<double> flipped;
  for (const double v : y) flipped.push_back(-v);
  const MetricsReport r = compute_metrics(y, flipped);
  CHECK(*r.pearson_r == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(*r.spearman_rho == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r.directional_accuracy == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*r.r_squared == doctest::Approx(-3.0).epsilon(1e-10));
}

TEST_CASE("the exact mean predictor has R^2 = 0 and undefined correlations") {
  double mean = 0.0;
  for (const double v : kY) mean += v;
  mean /= static_cast<double>(kY.size());
  const std::vector<double> constant(kY.size(), mean);
  const MetricsReport r = compute_metrics(kY, constant);
  CHECK_FALSE(r.pearson_r.has_value());
  CHECK_FALSE(r.spearman_rho.has_value());
  REQUIRE(r.r_squared.has_value());
  CHECK(*r.r_squared == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.rmse > 0.0);
}

TEST_CASE("R^2 decays as noise is added to perfect forecasts") {
  Rng rng(5);
  std::vector<double> y(200);
  for (double& v : y) v = rng.normal();
  double last = 1.0;
  for (const double noise : {0.1, 0.5, 1.0}) {
    Rng nrng(7);
    std::vector<double> yh = y;
    for (double& v : yh) v += noise * nrng.normal();
    const MetricsReport r = compute_metrics(y, yh);
    REQUIRE(r.r_squared.has_value());
    CHECK(*r.r_squared < last);
    last = *r.r_squared;
  }
}

TEST_CASE("zero counts as its own sign category") {
  const std::vector<double> y{0.0, 0.0, 1.0, -1.0};
  const std::vector<double> yh{0.0, 0.5, 2.0, -0.5};
  // matches: (0,0) yes, (0,0.5) no, (+,+) yes, (-,-) yes
  const MetricsReport r = compute_metrics(y, yh);
  CHECK(r.directional_accuracy == doctest::Approx(75.0).epsilon(1e-12));
}

TEST_CASE("degenerate metric inputs") {
  CHECK_THROWS_AS((void)compute_metrics({}, {}), Error);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS((void)compute_metrics(one, one), Error);
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{1.0, 2.0};
  CHECK_THROWS_AS((void)compute_metrics(a, b), Error);
  // constant actuals leave correlations and R^2 undefined, the rest defined
  const std::vector<double> flat{2.0, 2.0, 2.0};
  const std::vector<double> var{1.0, 2.0, 3.0};
  const MetricsReport r = compute_metrics(flat, var);
  CHECK_FALSE(r.pearson_r.has_value());
  CHECK_FALSE(r.r_squared.has_value());
  CHECK(std::isfinite(r.rmse));
}

TEST_CASE("spearman equals pearson on average-tie ranks") {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> y(30), yh(30);
    for (double& v : y) v = static_cast<double>(rng.below(8));
    for (double& v : yh) v = static_cast<double>(rng.below(8));
    const MetricsReport r = compute_metrics(y, yh);
    const auto ry = liquidcast::numerics::rank_transform(y);
    const auto rh = liquidcast::numerics::rank_transform(yh);
    const MetricsReport rr = compute_metrics(ry, rh);
    REQUIRE(r.spearman_rho.has_value() == rr.pearson_r.has_value());
    if (r.spearman_rho) {
      CHECK(*r.spearman_rho == doctest::Approx(*rr.pearson_r).epsilon(1e-12));
    }
  }
}

TEST_CASE("bias test matches the frozen reference") {
  const BiasReport r = bias_test(kY, kYhat);
  CHECK(r.n == 6);
  CHECK(r.mean_error == doctest::Approx(0.23333333333333336).epsilon(1e-12));
  CHECK(r.t_stat == doctest::Approx(2.1500329089188295).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.0842415196293927).epsilon(1e-10));
}

TEST_CASE("bias test edge cases") {
  const std::vector<double> y{1.0, 2.0, 3.0};
  try {
    (void)bias_test(y, y);  // zero errors -> zero variance
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVarianceErrors);
  }
  // symmetric errors: zero mean, p = 1
  const std::vector<double> yh{1.5, 2.0, 2.5};
  const BiasReport r = bias_test(y, yh);
  CHECK(r.mean_error == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.p_value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("student-t two-sided p matches the frozen reference") {
  CHECK(student_t_two_sided_p(1.5, 5.0) ==
        doctest::Approx(0.19390368024247315).epsilon(1e-12));
  CHECK(student_t_two_sided_p(-2.3, 28.0) ==
        doctest::Approx(0.02911201513565247).epsilon(1e-12));
  CHECK(student_t_two_sided_p(0.0, 10.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(student_t_two_sided_p(0.7, 158.0) ==
        doctest::Approx(0.4849566996917749).epsilon(1e-12));
  CHECK(student_t_two_sided_p(50.0, 10.0) < 1e-10);
  CHECK_THROWS_AS((void)student_t_two_sided_p(1.0, 0.0), Error);
}

TEST_CASE("regularized incomplete beta matches the frozen reference") {
  CHECK(regularized_incomplete_beta(0.5, 0.5, 0.3) ==
        doctest::Approx(0.36901011956554536).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.5) ==
        doctest::Approx(0.6875).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(5.0, 1.5, 0.9) ==
        doctest::Approx(0.7761721343162159).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(80.0, 0.5, 0.98) ==
        doctest::Approx(0.0726386275521778).epsilon(1e-10));
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}
