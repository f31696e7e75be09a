#include "clonekit/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "clonekit/error.hpp"

namespace clonekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_binomial_coefficient(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

bool is_nonneg_integer(double x) { return x >= 0.0 && std::floor(x) == x; }

std::int64_t sample_poisson(double mean, Rng& rng) {
  if (mean <= 30.0) {
    // Sequential inversion.
    const double u = rng.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::int64_t k = 0;
    while (u > cdf && k < 10000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

}  // namespace

std::string_view family_id(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::bernoulli: return "bernoulli";
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::gauss_location: return "gauss-loc";
  }
  return "unknown";
}

FamilyKind family_from_id(std::string_view id) {
  if (id == "bernoulli") return FamilyKind::bernoulli;
  if (id == "poisson") return FamilyKind::poisson;
  if (id == "gauss-loc") return FamilyKind::gauss_location;
  throw ConfigError("unknown family id '" + std::string(id) + "'");
}

bool is_discrete(FamilyKind kind) { return kind != FamilyKind::gauss_location; }

bool in_domain(FamilyKind kind, double theta) {
  switch (kind) {
    case FamilyKind::bernoulli: return theta > 0.0 && theta < 1.0;
    case FamilyKind::poisson: return theta > 0.0 && theta < kInf;
    case FamilyKind::gauss_location: return std::isfinite(theta);
  }
  return false;
}

FamilyPoint::FamilyPoint(FamilyKind k, double t, double s) : kind(k), theta(t), sigma(s) {
  if (!in_domain(kind, theta)) {
    throw DomainError("theta = " + std::to_string(theta) + " outside the domain of " + std::string(family_id(kind)));
  }
  if (kind == FamilyKind::gauss_location && !(sigma > 0.0 && std::isfinite(sigma))) {
    throw DomainError("gauss-loc: sigma must be positive");
  }
}

std::pair<double, double> clipped_domain(FamilyKind kind, std::size_t n) {
  const double step = 1.0 / static_cast<double>(std::max<std::size_t>(n, 1));
  switch (kind) {
    case FamilyKind::bernoulli: return {std::min(step, 0.5), std::max(1.0 - step, 0.5)};
    case FamilyKind::poisson: return {step, kInf};
    case FamilyKind::gauss_location: return {-kInf, kInf};
  }
  return {-kInf, kInf};
}

double clip_theta(FamilyKind kind, double theta, std::size_t n) {
  const auto [lo, hi] = clipped_domain(kind, n);
  return std::clamp(theta, lo, hi);
}

double log_density(const FamilyPoint& f, double omega) {
  const double t = f.theta;
  switch (f.kind) {
    case FamilyKind::bernoulli:
      if (omega == 1.0) return std::log(t);
      if (omega == 0.0) return std::log1p(-t);
      return -kInf;
    case FamilyKind::poisson:
      if (!is_nonneg_integer(omega)) return -kInf;
      return omega * std::log(t) - t - std::lgamma(omega + 1.0);
    case FamilyKind::gauss_location: {
      const double z = (omega - t) / f.sigma;
      return -0.5 * z * z - std::log(f.sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
  }
  return -kInf;
}

double density(const FamilyPoint& f, double omega) { return std::exp(log_density(f, omega)); }

double score(const FamilyPoint& f, double omega) {
  const double t = f.theta;
  switch (f.kind) {
    case FamilyKind::bernoulli: return (omega - t) / (t * (1.0 - t));
    case FamilyKind::poisson: return omega / t - 1.0;
    case FamilyKind::gauss_location: return (omega - t) / (f.sigma * f.sigma);
  }
  return 0.0;
}

ScoreReport fisher_info(const FamilyPoint& f) {
  double j = 0.0;
  switch (f.kind) {
    case FamilyKind::bernoulli: j = 1.0 / (f.theta * (1.0 - f.theta)); break;
    case FamilyKind::poisson: j = 1.0 / f.theta; break;
    case FamilyKind::gauss_location: j = 1.0 / (f.sigma * f.sigma); break;
  }
  return {j, j};
}

double mean_outcome(const FamilyPoint& f) { return f.theta; }

double variance_outcome(const FamilyPoint& f) {
  switch (f.kind) {
    case FamilyKind::bernoulli: return f.theta * (1.0 - f.theta);
    case FamilyKind::poisson: return f.theta;
    case FamilyKind::gauss_location: return f.sigma * f.sigma;
  }
  return 0.0;
}

double sample_one(const FamilyPoint& f, Rng& rng) {
  switch (f.kind) {
    case FamilyKind::bernoulli: return rng.uniform() < f.theta ? 1.0 : 0.0;
    case FamilyKind::poisson: return static_cast<double>(sample_poisson(f.theta, rng));
    case FamilyKind::gauss_location: return f.theta + f.sigma * rng.normal();
  }
  return 0.0;
}

Sample sample(const FamilyPoint& f, std::size_t n, Rng& rng) {
  Sample out(n);
  for (auto& x : out) x = sample_one(f, rng);
  return out;
}

double suff_stat(const FamilyPoint&, std::span<const double> data) {
  if (data.empty()) throw DomainError("suff_stat: data must be nonempty");
  return std::accumulate(data.begin(), data.end(), 0.0);
}

ScoreAffine score_affine(const FamilyPoint& f) {
  // Each built-in score is (omega - theta) * slope.
  return {f.theta, fisher_info(f).fisher};
}

std::int64_t randomized_round(double s, Rng& rng) {
  const double fl = std::floor(s);
  const double frac = s - fl;
  auto base = static_cast<std::int64_t>(fl);
  if (frac > 0.0 && rng.uniform() < frac) ++base;
  return base;
}

std::pair<double, double> stat_range(FamilyKind kind, std::size_t n) {
  switch (kind) {
    case FamilyKind::bernoulli: return {0.0, static_cast<double>(n)};
    case FamilyKind::poisson: return {0.0, kInf};
    case FamilyKind::gauss_location: return {-kInf, kInf};
  }
  return {-kInf, kInf};
}

Sample conditional_resample_exact(const FamilyPoint& f, std::size_t n, std::int64_t stat, Rng& rng) {
  if (n == 0) throw DomainError("conditional_resample: n must be positive");
  Sample out(n, 0.0);
  switch (f.kind) {
    case FamilyKind::bernoulli: {
      if (stat < 0 || stat > static_cast<std::int64_t>(n)) throw DomainError("conditional_resample: infeasible count");
      // Partial Fisher-Yates: the first `stat` positions of a random permutation get ones.
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::int64_t i = 0; i < stat; ++i) {
        const auto left = n - static_cast<std::size_t>(i);
        const auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng.uniform() * static_cast<double>(left));
        std::swap(idx[static_cast<std::size_t>(i)], idx[std::min(j, n - 1)]);
        out[idx[static_cast<std::size_t>(i)]] = 1.0;
      }
      return out;
    }
    case FamilyKind::poisson: {
      if (stat < 0) throw DomainError("conditional_resample: infeasible count");
      for (std::int64_t i = 0; i < stat; ++i) {
        const auto cell = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)), n - 1);
        out[cell] += 1.0;
      }
      return out;
    }
    case FamilyKind::gauss_location:
      throw UnsupportedError("conditional_resample_exact: integer statistic requires a discrete family");
  }
  return out;
}

ResampleResult conditional_resample(const FamilyPoint& f, std::size_t n, double target_stat, Rng& rng) {
  if (n == 0) throw DomainError("conditional_resample: n must be positive");
  ResampleResult out;
  if (f.kind == FamilyKind::gauss_location) {
    Sample z(n);
    for (auto& v : z) v = f.sigma * rng.normal();
    const double zbar = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(n);
    const double centre = target_stat / static_cast<double>(n);
    out.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.data[i] = centre + (z[i] - zbar);
    out.realized_stat = target_stat;
    return out;
  }
  const auto [lo, hi] = stat_range(f.kind, n);
  std::int64_t t = randomized_round(target_stat, rng);
  if (static_cast<double>(t) < lo) {
    t = static_cast<std::int64_t>(lo);
    out.clipped = true;
  } else if (static_cast<double>(t) > hi) {
    t = static_cast<std::int64_t>(hi);
    out.clipped = true;
  }
  out.realized_stat = static_cast<double>(t);
  out.data = conditional_resample_exact(f, n, t, rng);
  return out;
}

std::vector<double> stat_pmf(const FamilyPoint& f, std::size_t n) {
  const double nn = static_cast<double>(n);
  std::vector<double> pmf;
  switch (f.kind) {
    case FamilyKind::bernoulli: {
      pmf.resize(n + 1);
      const double lt = std::log(f.theta);
      const double l1t = std::log1p(-f.theta);
      for (std::size_t k = 0; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        pmf[k] = std::exp(log_binomial_coefficient(nn, kk) + kk * lt + (nn - kk) * l1t);
      }
      break;
    }
    case FamilyKind::poisson: {
      const double lambda = nn * f.theta;
      const auto top = static_cast<std::size_t>(lambda + 40.0 * std::sqrt(lambda) + 50.0);
      pmf.reserve(top + 1);
      const double ll = std::log(lambda);
      for (std::size_t k = 0; k <= top; ++k) {
        const double kk = static_cast<double>(k);
        pmf.push_back(std::exp(kk * ll - lambda - std::lgamma(kk + 1.0)));
      }
      while (pmf.size() > 1 && pmf.back() < 1e-17 && static_cast<double>(pmf.size()) > lambda) pmf.pop_back();
      break;
    }
    case FamilyKind::gauss_location:
      throw UnsupportedError("stat_pmf: continuous family has no pmf");
  }
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  for (auto& p : pmf) p /= total;
  return pmf;
}

}  // namespace clonekit
