#include "clonekit/lan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clonekit/error.hpp"
#include "clonekit/parallel.hpp"
#include "clonekit/quadrature.hpp"
#include "clonekit/special.hpp"

namespace clonekit {

ScoreProcessValue score_process(const FamilyPoint& f, std::span<const double> data) {
  if (data.empty()) throw DomainError("score_process: data must be nonempty");
  const double n = static_cast<double>(data.size());
  const ScoreAffine a = score_affine(f);
  return {data.size(), (suff_stat(f, data) - n * a.centre) * a.slope / std::sqrt(n)};
}

LanResidual loglik_ratio(const FamilyPoint& f, double h, std::span<const double> data) {
  if (data.empty()) throw DomainError("loglik_ratio: data must be nonempty");
  const double n = static_cast<double>(data.size());
  const double shifted_theta = f.theta + h / std::sqrt(n);
  if (!in_domain(f.kind, shifted_theta)) throw DomainError("loglik_ratio: theta + h/sqrt(n) outside the domain");
  const FamilyPoint shifted = f.with_theta(shifted_theta);
  LanResidual out;
  if (h != 0.0) {
    for (double omega : data) out.exact_loglr += log_density(shifted, omega) - log_density(f, omega);
  }
  out.quadratic = h * score_process(f, data).value - 0.5 * h * h * fisher_info(f).fisher;
  out.residual = out.exact_loglr - out.quadratic;
  return out;
}

LanResidualReport lan_residual_rate(const FamilyPoint& f, double h, std::span<const std::size_t> n_grid,
                                    double threshold, std::size_t reps, std::uint64_t seed, std::uint64_t stream_id,
                                    int workers) {
  if (reps == 0) throw DomainError("lan_residual_rate: reps must be positive");
  for (std::size_t j = 1; j < n_grid.size(); ++j) {
    if (n_grid[j] <= n_grid[j - 1]) throw DomainError("lan_residual_rate: n grid must be increasing");
  }
  LanResidualReport report;
  report.threshold = threshold;
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    const std::size_t n = n_grid[j];
    std::vector<unsigned char> hit(reps, 0);
    parallel_for(reps, workers, [&](std::size_t i) {
      Rng rng = Rng::stream(seed, stream_id, j * reps + i);
      const Sample data = sample(f, n, rng);
      hit[i] = std::fabs(loglik_ratio(f, h, data).residual) > threshold ? 1 : 0;
    });
    ExceedanceEstimate e;
    e.n = n;
    e.reps = reps;
    for (unsigned char b : hit) e.exceedances += b;
    e.probability = static_cast<double>(e.exceedances) / static_cast<double>(reps);
    std::tie(e.wilson_lo, e.wilson_hi) = wilson_interval(e.exceedances, reps);
    report.per_n.push_back(e);
  }
  report.strictly_decreasing = report.per_n.size() >= 2;
  for (std::size_t j = 1; j < report.per_n.size(); ++j) {
    const auto& prev = report.per_n[j - 1];
    const auto& cur = report.per_n[j];
    if (!(cur.probability < prev.probability && cur.wilson_hi < prev.wilson_lo)) report.strictly_decreasing = false;
  }
  return report;
}

SmoothedScore smoothed_score(const FamilyPoint& f, std::span<const double> data, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0)) throw DomainError("smoothed_score: epsilon must be nonnegative");
  SmoothedScore out;
  out.epsilon = epsilon;
  out.value = score_process(f, data).value / fisher_info(f).fisher;
  if (epsilon > 0.0) out.value += std::sqrt(epsilon) * rng.normal();
  return out;
}

std::vector<DqmResidual> dqm_residual(const FamilyPoint& f, std::span<const double> h_grid) {
  std::vector<DqmResidual> out;
  for (double h : h_grid) {
    DqmResidual row;
    row.h = h;
    if (h != 0.0) {
      if (!in_domain(f.kind, f.theta + h)) throw DomainError("dqm_residual: theta + h outside the domain");
      const FamilyPoint shifted = f.with_theta(f.theta + h);
      auto term = [&](double omega) {
        const double root = std::sqrt(density(f, omega));
        const double d = std::sqrt(density(shifted, omega)) - root - 0.5 * h * score(f, omega) * root;
        return d * d;
      };
      switch (f.kind) {
        case FamilyKind::bernoulli: row.residual = term(0.0) + term(1.0); break;
        case FamilyKind::poisson: {
          const double top = std::max(f.theta, f.theta + h);
          const auto kmax = static_cast<int>(top + 40.0 * std::sqrt(top) + 50.0);
          for (int k = 0; k <= kmax; ++k) row.residual += term(static_cast<double>(k));
          break;
        }
        case FamilyKind::gauss_location: {
          const double lo = std::min(f.theta, f.theta + h) - 14.0 * f.sigma;
          const double hi = std::max(f.theta, f.theta + h) + 14.0 * f.sigma;
          row.residual = adaptive_simpson(term, lo, hi, 1e-10).value;
          break;
        }
      }
      row.ratio = row.residual / (h * h);
    }
    out.push_back(row);
  }
  return out;
}

CouplingReport quantile_coupling(const FamilyPoint& f, std::span<const std::size_t> n_grid, double eps_dev,
                                 std::size_t resolution) {
  if (resolution == 0) throw DomainError("quantile_coupling: resolution must be positive");
  if (!(eps_dev > 0.0)) throw DomainError("quantile_coupling: eps_dev must be positive");
  CouplingReport report;
  report.eps_dev = eps_dev;
  report.resolution = resolution;
  const double root_j = std::sqrt(fisher_info(f).fisher);

  std::vector<double> gauss_quantiles(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    gauss_quantiles[i] = root_j * normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(resolution));
  }

  for (std::size_t n : n_grid) {
    if (n == 0) throw DomainError("quantile_coupling: n must be positive");
    CouplingRow row;
    row.n = n;
    if (is_discrete(f.kind)) {
      const std::vector<double> pmf = stat_pmf(f, n);
      const ScoreAffine a = score_affine(f);
      const double nn = static_cast<double>(n);
      std::vector<double> level(pmf.size());
      std::vector<double> cdf(pmf.size());
      double acc = 0.0;
      for (std::size_t k = 0; k < pmf.size(); ++k) {
        level[k] = (static_cast<double>(k) - nn * a.centre) * a.slope / std::sqrt(nn);
        acc += pmf[k];
        cdf[k] = acc;
      }
      cdf.back() = 1.0;
      // On (F(k-1), F(k)] eta^n is the constant level[k]; eta(w) = sqrt(J) Phi^{-1}(w)
      // is within eps of it exactly on (Phi((l-eps)/sqrt J), Phi((l+eps)/sqrt J)).
      double prev = 0.0;
      for (std::size_t k = 0; k < pmf.size(); ++k) {
        const double a0 = prev;
        const double b0 = cdf[k];
        prev = b0;
        if (!(b0 > a0)) continue;
        const double below = normal_cdf((level[k] - eps_dev) / root_j);
        const double above = normal_cdf((level[k] + eps_dev) / root_j);
        row.deviation_probability += std::max(0.0, std::min(b0, below) - a0) + std::max(0.0, b0 - std::max(a0, above));
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < resolution; ++i) {
        const double w = (static_cast<double>(i) + 0.5) / static_cast<double>(resolution);
        auto k = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), w) - cdf.begin());
        k = std::min(k, pmf.size() - 1);
        const double d = std::fabs(level[k] - gauss_quantiles[i]);
        sum += d;
        row.sup_deviation = std::max(row.sup_deviation, d);
      }
      row.mean_deviation = sum / static_cast<double>(resolution);
      row.deviation_probability = std::clamp(row.deviation_probability, 0.0, 1.0);
    }
    // Gaussian location: l^n is exactly N(0, J), so both quantile maps coincide.
    report.per_n.push_back(row);
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int points = 0;
  for (const auto& row : report.per_n) {
    if (row.mean_deviation > 0.0) {
      const double x = std::log(static_cast<double>(row.n));
      const double y = std::log(row.mean_deviation);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++points;
    }
  }
  report.log_log_slope = points >= 2 ? (points * sxy - sx * sy) / (points * sxx - sx * sx)
                                     : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace clonekit
