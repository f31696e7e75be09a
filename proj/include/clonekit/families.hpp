#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clonekit/rng.hpp"

namespace clonekit {

enum class FamilyKind { bernoulli, poisson, gauss_location };

std::string_view family_id(FamilyKind kind);
FamilyKind family_from_id(std::string_view id);
bool is_discrete(FamilyKind kind);

/// Outcomes are stored as doubles; discrete families use exact integer values.
using Sample = std::vector<double>;

/// A point theta in the open parameter interval of a one-parameter family.
/// `sigma` is the known scale of the Gaussian location family and is ignored
/// by the discrete families.
struct FamilyPoint {
  FamilyKind kind = FamilyKind::bernoulli;
  double theta = 0.5;
  double sigma = 1.0;

  /// Throws DomainError unless theta is strictly inside the parameter domain.
  FamilyPoint(FamilyKind kind, double theta, double sigma = 1.0);

  FamilyPoint with_theta(double t) const { return FamilyPoint(kind, t, sigma); }
};

/// A family without a parameter value: kind plus any known constants.
struct FamilySpec {
  FamilyKind kind = FamilyKind::bernoulli;
  double sigma = 1.0;

  FamilyPoint at(double theta) const { return FamilyPoint(kind, theta, sigma); }
};

bool in_domain(FamilyKind kind, double theta);

/// Working compact for n observations: [lo + 1/n, hi - 1/n] intersected with
/// the domain. Returned as {lo, hi}; collapses to the midpoint when n is tiny.
std::pair<double, double> clipped_domain(FamilyKind kind, std::size_t n);
double clip_theta(FamilyKind kind, double theta, std::size_t n);

double density(const FamilyPoint& f, double omega);
double log_density(const FamilyPoint& f, double omega);

/// d/dtheta log p_theta(omega).
double score(const FamilyPoint& f, double omega);

struct ScoreReport {
  double fisher = 0.0;          ///< J_theta
  double min_eigenvalue = 0.0;  ///< alpha_theta; equals fisher for m = 1
};

ScoreReport fisher_info(const FamilyPoint& f);

/// E_theta[omega]
double mean_outcome(const FamilyPoint& f);
/// Var_theta[omega]
double variance_outcome(const FamilyPoint& f);

double sample_one(const FamilyPoint& f, Rng& rng);
Sample sample(const FamilyPoint& f, std::size_t n, Rng& rng);

/// S = sum of outcomes; sufficient for all built-in families.
double suff_stat(const FamilyPoint& f, std::span<const double> data);

/// The n-sample score is affine in S: l^n = (S - n * centre) * slope / sqrt(n).
struct ScoreAffine {
  double centre = 0.0;
  double slope = 0.0;
};

ScoreAffine score_affine(const FamilyPoint& f);

/// Expectation-preserving rounding: floor(s) + Bernoulli(frac(s)).
std::int64_t randomized_round(double s, Rng& rng);

/// Feasible range of S for n observations (Bernoulli [0, n], Poisson [0, inf)).
/// Continuous families have no restriction.
std::pair<double, double> stat_range(FamilyKind kind, std::size_t n);

struct ResampleResult {
  Sample data;
  double realized_stat = 0.0;
  bool clipped = false;
};

/// Draw omega^n from the conditional law given S = target. Discrete targets
/// are randomized-rounded, then clipped into the feasible range (clipping is
/// flagged, not an error).
///   Bernoulli: T ones placed uniformly at random among n slots
///   Poisson:   multinomial(T, uniform over n cells)
///   Gaussian:  T/n + (Z_i - Zbar), Z_i i.i.d. N(0, sigma^2)
ResampleResult conditional_resample(const FamilyPoint& f, std::size_t n, double target_stat, Rng& rng);

/// Conditional draw for an integer statistic that is already feasible.
Sample conditional_resample_exact(const FamilyPoint& f, std::size_t n, std::int64_t stat, Rng& rng);

/// Exact pmf of S under P_theta^n for discrete families, as parallel arrays
/// starting at support value 0. Poisson tails below 1e-17 are dropped and the
/// remainder is renormalized.
std::vector<double> stat_pmf(const FamilyPoint& f, std::size_t n);

}  // namespace clonekit
