#include <cmath>
#include <vector>

#include "doctest.h"
#include "liquidcast/errors.hpp"
#include "liquidcast/numerics.hpp"
#include "liquidcast/rng.hpp"

using liquidcast::Error;
using liquidcast::ErrorCode;
using namespace liquidcast::numerics;

TEST_CASE("least squares recovers a planted coefficient vector") {
  // y = X * [0.75, -1.25, 2.5] exactly; solution frozen from an independent
  // lstsq computation.
  Matrix x(12, 3);
  Vector y(12);
  for (int i = 0; i < 12; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = ((2 + 5 * i) % 9 - 4) / 4.0;
    x(i, 2) = ((1 + 3 * i) % 7 - 3) / 2.0;
    y(i) = 0.75 * x(i, 0) - 1.25 * x(i, 1) + 2.5 * x(i, 2);
  }
  const Vector beta = solve_least_squares(x, y);
  REQUIRE(beta.size() == 3);
  CHECK(beta(0) == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(beta(1) == doctest::Approx(-1.25).epsilon(1e-8));
  CHECK(beta(2) == doctest::Approx(2.5).epsilon(1e-8));
}

TEST_CASE("least squares: zero targets give zero coefficients") {
  Matrix x = Matrix::Identity(4, 4);
  const Vector beta = solve_least_squares(x, Vector::Zero(4));
  CHECK(beta.norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("least squares accepts more columns than rows") {
  // consistent underdetermined system: the ridge floor picks a finite
  // solution whose fit residual is tiny
  liquidcast::Rng rng(3);
  Matrix x(5, 9);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 9; ++c) x(r, c) = rng.normal();
  }
  Vector truth(9);
  for (int c = 0; c < 9; ++c) truth(c) = rng.normal();
  const Vector y = x * truth;
  const Vector beta = solve_least_squares(x, y);
  CHECK((x * beta - y).norm() < 1e-6);
}

TEST_CASE("least squares rejects shape mismatch and non-finite input") {
  Matrix x(3, 2);
  x.setOnes();
  CHECK_THROWS_AS(solve_least_squares(x, Vector::Zero(4)), Error);
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)solve_least_squares(x, Vector::Zero(3));
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularSystem);
  }
}

TEST_CASE("standardizer: hand-checked moments and unit scaled spread") {
  Matrix x(4, 2);
  x << 1.0, 5.0, 2.0, 5.0, 3.0, 5.0, 4.0, 5.0;
  const Standardizer s = fit_standardizer(x);
  CHECK(s.means(0) == doctest::Approx(2.5).epsilon(1e-15));
  // sample std of 1..4 = sqrt(5/3)
  CHECK(s.stds(0) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-14));
  const Matrix z = s.apply(x);
  CHECK(z.col(1).cwiseAbs().maxCoeff() == 0.0);  // constant column maps to 0
  double mean = z.col(0).mean();
  double ss = (z.col(0).array() - mean).square().sum() / 3.0;
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(ss == doctest::Approx(1.0).epsilon(1e-12));

  const Vector row = s.apply_row(x.row(2).transpose());
  CHECK(row(0) == doctest::Approx(z(2, 0)).epsilon(1e-15));
  CHECK(row(1) == z(2, 1));
}

TEST_CASE("standardizer: single row fits without dividing by zero") {
  Matrix x(1, 2);
  x << 3.0, -1.0;
  const Standardizer s = fit_standardizer(x);
  const Matrix z = s.apply(x);
  CHECK(std::isfinite(z(0, 0)));
  CHECK(z(0, 0) == 0.0);
}

TEST_CASE("acf matches an independently computed reference") {
  std::vector<double> v(12);
  for (int i = 0; i < 12; ++i) v[static_cast<std::size_t>(i)] = (((3 + 5 * i) % 11) - 5) / 8.0;
  const std::vector<double> rho = acf(v, 4);
  REQUIRE(rho.size() == 4);
  CHECK(rho[0] == doctest::Approx(-0.48118279569892475).epsilon(1e-12));
  CHECK(rho[1] == doctest::Approx(0.37047898338220925).epsilon(1e-12));
  CHECK(rho[2] == doctest::Approx(-0.2573313782991203).epsilon(1e-12));
  CHECK(rho[3] == doctest::Approx(-0.14467253176930603).epsilon(1e-12));
}

TEST_CASE("acf rejects degenerate input") {
  std::vector<double> flat(20, 2.0);
  try {
    (void)acf(flat, 3);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateSeries);
  }
  std::vector<double> tiny{1.0, 2.0};
  CHECK_THROWS_AS((void)acf(tiny, 2), Error);
}

TEST_CASE("rank transform averages ties") {
  const std::vector<double> v{3.5, 1.0, 2.0, 3.5, -1.0, 2.0};
  const std::vector<double> expected{5.5, 2.0, 3.5, 5.5, 1.0, 3.5};
  CHECK(rank_transform(v) == expected);
}

TEST_CASE("rank transform agrees with a sort-based oracle on random ties") {
  liquidcast::Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(40);
    for (double& x : v) x = static_cast<double>(rng.below(6));
    const std::vector<double> got = rank_transform(v);
    // oracle: rank of x = (#smaller) + (#equal + 1) / 2
    for (std::size_t i = 0; i < v.size(); ++i) {
      double smaller = 0, equal = 0;
      for (const double x : v) {
        smaller += x < v[i];
        equal += x == v[i];
      }
      CHECK(got[i] == doctest::Approx(smaller + (equal + 1.0) / 2.0).epsilon(1e-12));
    }
  }
}
