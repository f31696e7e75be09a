#include <doctest.h>

#include <cmath>

#include "clonekit/error.hpp"
#include "clonekit/gaussian.hpp"
#include "clonekit/rng.hpp"

using namespace clonekit;

namespace {

GaussianShift line(double mean, double variance) {
  return GaussianShift(Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, variance));
}

}  // namespace

TEST_CASE("crossing radius") {
  CHECK(crossing_radius_sq(2.0, 1) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
  CHECK(crossing_radius_sq(4.0, 3) == doctest::Approx(3 * 4.0 * std::log(4.0) / 3.0).epsilon(1e-15));
  // r -> 1 limit is m.
  CHECK(crossing_radius_sq(1.0 + 1e-12, 2) == doctest::Approx(2.0).epsilon(1e-11));
  CHECK_THROWS_AS(crossing_radius_sq(1.0, 1), DomainError);
}

TEST_CASE("closed-form loss constants") {
  // Reference values from independent numerical integration.
  CHECK(tv_isotropic(2.0, 1).value == doctest::Approx(0.3321281499670259).epsilon(1e-12));
  CHECK(tv_isotropic(4.0, 1).value == doctest::Approx(0.6453491376695375).epsilon(1e-12));
  CHECK(tv_isotropic(2.0, 2).value == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(tv_isotropic(2.0, 3).value == doctest::Approx(0.622544439122878).epsilon(1e-12));
  CHECK(tv_isotropic(2.0 / 0.95, 1).value == doctest::Approx(0.3561675455072948).epsilon(1e-12));
  CHECK(tv_isotropic(1.0, 4).value == 0.0);
  CHECK(*tv_isotropic(1.0, 4).crossing_radius_sq == 4.0);  // the r -> 1 limit of m r ln r / (r - 1)
  CHECK(*tv_isotropic(2.0, 1).crossing_radius_sq == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("loss is increasing in r and m") {
  double prev = 0.0;
  for (double r : {1.0, 1.01, 1.5, 2.0, 4.0, 16.0, 256.0}) {
    const double v = tv_isotropic(r, 2).value;
    CHECK(v >= prev);
    CHECK(v < 2.0);
    prev = v;
  }
  for (int m = 1; m < 6; ++m) CHECK(tv_isotropic(2.0, m + 1).value > tv_isotropic(2.0, m).value);
}

TEST_CASE("quadrature agrees with the closed form") {
  Rng rng(1);
  CHECK(tv_numeric(line(0, 1), line(0, 2), TvMethod::quadrature, 0, rng).value ==
        doctest::Approx(0.3321281499670259).epsilon(1e-6));
  CHECK(tv_numeric(line(0, 1), line(1, 2), TvMethod::quadrature, 0, rng).value ==
        doctest::Approx(0.6912801703205034).epsilon(1e-6));
  const auto p2 = GaussianShift::standard(2);
  const auto q2 = GaussianShift::isotropic(Eigen::VectorXd::Zero(2), 2.0);
  CHECK(tv_numeric(p2, q2, TvMethod::quadrature, 0, rng).value == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(tv_numeric(p2, p2, TvMethod::quadrature, 0, rng).value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("quadrature rejects m > 2") {
  Rng rng(1);
  const auto p = GaussianShift::standard(3);
  CHECK_THROWS_AS(tv_numeric(p, p, TvMethod::quadrature, 0, rng), UnsupportedError);
}

TEST_CASE("Monte Carlo routes agree within four standard errors") {
  Rng rng(7);
  const auto p = GaussianShift::standard(3);
  const auto q = GaussianShift::isotropic(Eigen::VectorXd::Zero(3), 2.0);
  const auto mc = tv_numeric(p, q, TvMethod::monte_carlo, 200000, rng);
  CHECK(mc.std_error > 0.0);
  CHECK(std::fabs(mc.value - tv_isotropic(2.0, 3).value) < 4 * mc.std_error);
  const auto ball = tv_ball_indicator(2.0, 3, 200000, rng);
  CHECK(std::fabs(ball.value - tv_isotropic(2.0, 3).value) < 4 * ball.std_error);
}

TEST_CASE("loss does not depend on the covariance after whitening") {
  Rng rng(3);
  Eigen::MatrixXd cov(2, 2);
  cov << 4.0, 1.5, 1.5, 2.0;
  const Eigen::MatrixXd w = whiten(cov);
  CHECK((w * cov * w.transpose() - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
  const GaussianShift p(Eigen::Vector2d(1.0, -1.0), cov);
  const GaussianShift q(Eigen::Vector2d(1.0, -1.0) * std::sqrt(2.0), 2.0 * cov);
  // Means differ here, so this is not the isotropic constant; compare against
  // the same pair in whitened coordinates.
  const GaussianShift pw(w * p.mean(), Eigen::MatrixXd::Identity(2, 2));
  const GaussianShift qw(w * q.mean(), 2.0 * Eigen::MatrixXd::Identity(2, 2));
  const double a = tv_numeric(p, q, TvMethod::quadrature, 0, rng).value;
  const double b = tv_numeric(pw, qw, TvMethod::quadrature, 0, rng).value;
  CHECK(a == doctest::Approx(b).epsilon(1e-6));
}

TEST_CASE("gaussian shift validation and density") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(GaussianShift(Eigen::Vector2d::Zero(), bad), NumericalError);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.1, 0.0, 1.0;
  CHECK_THROWS_AS(GaussianShift(Eigen::Vector2d::Zero(), asym), DomainError);
  CHECK(GaussianShift::standard(1).density(Eigen::VectorXd::Zero(1)) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-15));
}

TEST_CASE("tv method names round-trip") {
  for (auto m : {TvMethod::closed_form, TvMethod::quadrature, TvMethod::monte_carlo, TvMethod::ball_indicator}) {
    CHECK(tv_method_from_string(to_string(m)) == m);
  }
}
