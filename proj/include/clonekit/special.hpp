#pragma once

#include <cstddef>
#include <span>
#include <utility>

namespace clonekit {

double normal_pdf(double x);
double normal_cdf(double x);

/// Inverse standard normal CDF. Acklam's rational approximation refined by one
/// Halley step; relative error near machine precision on (0, 1).
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x): series for x < a + 1, Lentz
/// continued fraction for the complement otherwise. Absolute accuracy 1e-12.
double regularized_gamma_p(double a, double x);

/// P(chi^2_m <= t). Throws DomainError for m == 0 or t < 0.
double chi2_cdf(int dof, double t);

/// Upper tail 1 - chi2_cdf, computed without cancellation.
double chi2_sf(int dof, double t);

/// Wilson score interval for a binomial proportion; z = 1.959964 gives 95%.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct GofResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson chi-square goodness of fit of counts against cell probabilities.
/// Adjacent cells are pooled left to right until each expected count reaches
/// `min_expected`; a short remainder joins the last pooled cell.
GofResult chi_square_gof(std::span<const std::size_t> observed, std::span<const double> probs,
                         double min_expected = 5.0);

}  // namespace clonekit
