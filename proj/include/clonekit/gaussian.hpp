#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string_view>

#include "clonekit/rng.hpp"

namespace clonekit {

/// N(mean, cov) with cov symmetric positive definite. The Cholesky factor is
/// computed once at construction.
class GaussianShift {
 public:
  GaussianShift(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  /// N(0, 1_m)
  static GaussianShift standard(int dim);
  /// N(mean, scale * 1_m)
  static GaussianShift isotropic(Eigen::VectorXd mean, double scale);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  /// Lower-triangular L with L L^T = cov.
  const Eigen::MatrixXd& cholesky_factor() const { return chol_; }

  double log_density(const Eigen::VectorXd& x) const;
  double density(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(Rng& rng) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
  double log_norm_;  // -0.5 * (m log 2pi + log det cov)
};

enum class TvMethod { closed_form, quadrature, monte_carlo, ball_indicator };

std::string_view to_string(TvMethod method);
TvMethod tv_method_from_string(std::string_view name);

/// An L1 distance between two laws (twice the total variation).
struct TvResult {
  double value = 0.0;
  TvMethod method = TvMethod::closed_form;
  double std_error = 0.0;
  std::optional<double> crossing_radius_sq;
};

/// Squared radius at which the N(0,1_m) and N(0,r 1_m) densities cross:
/// m r ln r / (r - 1). Requires r > 1.
double crossing_radius_sq(double r, int m);

/// Closed form ||N(0,1_m) - N(0,r 1_m)||_1 for r >= 1. This is the optimal
/// amplification (and cloning) loss of the Gaussian shift family, for any
/// covariance.
TvResult tv_isotropic(double r, int m);

/// Numeric L1 distance between two Gaussians.
///   quadrature   adaptive Simpson on [-12,12]^m after whitening by p, m <= 2,
///                absolute tolerance 1e-6 (`budget` ignored)
///   monte_carlo  E_p[(1 - q/p)^+] + E_q[(1 - p/q)^+] with `budget` draws each
TvResult tv_numeric(const GaussianShift& p, const GaussianShift& q, TvMethod method, std::size_t budget, Rng& rng);

/// Monte Carlo of 2[P(|Z|^2 <= t*) - P(r|Z|^2 <= t*)], i.e. the ball B_r test
/// applied to N(0,1_m) against N(0,r 1_m). Only meaningful for that pair.
TvResult tv_ball_indicator(double r, int m, std::size_t budget, Rng& rng);

/// W with W cov W^T = I: the inverse of the lower Cholesky factor.
Eigen::MatrixXd whiten(const Eigen::MatrixXd& cov);

}  // namespace clonekit
