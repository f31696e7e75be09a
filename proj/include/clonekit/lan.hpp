#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "clonekit/families.hpp"
#include "clonekit/rng.hpp"

namespace clonekit {

/// l^n_theta = n^{-1/2} sum_k score(omega_k).
struct ScoreProcessValue {
  std::size_t n = 0;
  double value = 0.0;
};

ScoreProcessValue score_process(const FamilyPoint& f, std::span<const double> data);

/// Log-likelihood ratio of theta + h/sqrt(n) against theta, exactly and through
/// its quadratic (LAN) approximation h l^n - h^2 J / 2.
struct LanResidual {
  double exact_loglr = 0.0;
  double quadratic = 0.0;
  double residual = 0.0;
};

LanResidual loglik_ratio(const FamilyPoint& f, double h, std::span<const double> data);

struct ExceedanceEstimate {
  std::size_t n = 0;
  std::size_t exceedances = 0;
  std::size_t reps = 0;
  double probability = 0.0;
  double wilson_lo = 0.0;  ///< 95% Wilson score interval
  double wilson_hi = 0.0;
};

struct LanResidualReport {
  double threshold = 0.0;
  std::vector<ExceedanceEstimate> per_n;
  /// True when every consecutive pair has strictly decreasing point estimates
  /// and disjoint Wilson intervals. Reported, not enforced.
  bool strictly_decreasing = false;
};

/// Monte Carlo estimate of P_theta^n{|residual| > threshold} for each n.
/// Replicate i of grid point j uses Rng::stream(seed, stream_id, j * reps + i).
LanResidualReport lan_residual_rate(const FamilyPoint& f, double h, std::span<const std::size_t> n_grid,
                                    double threshold, std::size_t reps, std::uint64_t seed, std::uint64_t stream_id,
                                    int workers = 1);

/// L = J^{-1} l^n + Y with Y ~ N(0, epsilon).
struct SmoothedScore {
  double epsilon = 0.0;
  double value = 0.0;
};

SmoothedScore smoothed_score(const FamilyPoint& f, std::span<const double> data, double epsilon, Rng& rng);

struct DqmResidual {
  double h = 0.0;
  double residual = 0.0;  ///< integral (sqrt p_{theta+h} - sqrt p_theta - h/2 score sqrt p_theta)^2
  double ratio = 0.0;     ///< residual / h^2 (0 when h = 0)
};

/// Quadratic-mean differentiability residual for each step h. Sums over the
/// support for discrete families, adaptive quadrature (tol 1e-10) otherwise.
std::vector<DqmResidual> dqm_residual(const FamilyPoint& f, std::span<const double> h_grid);

struct CouplingRow {
  std::size_t n = 0;
  double deviation_probability = 0.0;  ///< Lebesgue measure of {|eta^n - eta| >= eps_dev}
  double mean_deviation = 0.0;         ///< integral |eta^n - eta| over the probe grid
  double sup_deviation = 0.0;          ///< max |eta^n - eta| over the probe grid
};

struct CouplingReport {
  double eps_dev = 0.0;
  std::size_t resolution = 0;
  std::vector<CouplingRow> per_n;
  /// Least-squares slope of log(mean_deviation) against log(n); NaN if fewer
  /// than two positive values.
  double log_log_slope = 0.0;
};

/// Quantile (inverse-CDF) coupling on ([0,1], Lebesgue) of the exact law of
/// l^n_theta with N(0, J_theta). Discrete families use the exact pmf of the
/// sufficient statistic; the Gaussian location family couples exactly.
/// The exceedance probability is computed exactly per atom; mean and sup
/// deviations are evaluated on the midpoint grid (i + 1/2)/resolution.
CouplingReport quantile_coupling(const FamilyPoint& f, std::span<const std::size_t> n_grid, double eps_dev,
                                 std::size_t resolution);

}  // namespace clonekit
