#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "clonekit/error.hpp"
#include "clonekit/families.hpp"
#include "clonekit/rng.hpp"
#include "clonekit/special.hpp"

using namespace clonekit;

namespace {

double fd_score(const FamilyPoint& f, double omega) {
  const double h = 1e-5;
  return (log_density(f.with_theta(f.theta + h), omega) - log_density(f.with_theta(f.theta - h), omega)) / (2 * h);
}

std::vector<FamilyPoint> interior_points() {
  return {FamilyPoint(FamilyKind::bernoulli, 0.2), FamilyPoint(FamilyKind::bernoulli, 0.5),
          FamilyPoint(FamilyKind::bernoulli, 0.9), FamilyPoint(FamilyKind::poisson, 0.5),
          FamilyPoint(FamilyKind::poisson, 2.0), FamilyPoint(FamilyKind::poisson, 12.0),
          FamilyPoint(FamilyKind::gauss_location, -1.0, 0.5), FamilyPoint(FamilyKind::gauss_location, 0.0, 1.0),
          FamilyPoint(FamilyKind::gauss_location, 3.0, 2.0)};
}

}  // namespace

TEST_CASE("density examples") {
  CHECK(density(FamilyPoint(FamilyKind::bernoulli, 0.5), 1.0) == doctest::Approx(0.5));
  CHECK(density(FamilyPoint(FamilyKind::poisson, 1.0), 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(density(FamilyPoint(FamilyKind::gauss_location, 0.0, 1.0), 0.0) ==
        doctest::Approx(1.0 / std::sqrt(2 * M_PI)).epsilon(1e-15));
  CHECK(density(FamilyPoint(FamilyKind::bernoulli, 0.5), 2.0) == 0.0);
  CHECK(density(FamilyPoint(FamilyKind::poisson, 1.0), 1.5) == 0.0);
  CHECK(density(FamilyPoint(FamilyKind::poisson, 1.0), -1.0) == 0.0);
}

TEST_CASE("pmfs sum to one") {
  for (double t : {0.1, 0.5, 0.99}) {
    const FamilyPoint f(FamilyKind::bernoulli, t);
    CHECK(density(f, 0.0) + density(f, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (double t : {0.3, 4.0, 25.0}) {
    const FamilyPoint f(FamilyKind::poisson, t);
    double s = 0.0;
    for (int k = 0; k < 200; ++k) s += density(f, k);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("score examples and finite differences") {
  CHECK(score(FamilyPoint(FamilyKind::bernoulli, 0.5), 1.0) == doctest::Approx(2.0));
  CHECK(score(FamilyPoint(FamilyKind::poisson, 1.0), 2.0) == doctest::Approx(1.0));
  CHECK(score(FamilyPoint(FamilyKind::gauss_location, 0.0, 1.0), 0.0) == 0.0);
  for (const auto& f : interior_points()) {
    for (double omega : {0.0, 1.0, 2.0, 5.0}) {
      if (f.kind == FamilyKind::bernoulli && omega > 1.0) continue;
      const double s = score(f, omega);
      CHECK(s == doctest::Approx(fd_score(f, omega)).epsilon(1e-6));
    }
  }
}

TEST_CASE("fisher information examples") {
  CHECK(fisher_info(FamilyPoint(FamilyKind::bernoulli, 0.5)).fisher == doctest::Approx(4.0));
  CHECK(fisher_info(FamilyPoint(FamilyKind::poisson, 2.0)).fisher == doctest::Approx(0.5));
  CHECK(fisher_info(FamilyPoint(FamilyKind::gauss_location, 1.0, 2.0)).fisher == doctest::Approx(0.25));
  // Bernoulli by enumeration.
  for (double t : {0.1, 0.3, 0.5}) {
    const FamilyPoint f(FamilyKind::bernoulli, t);
    const double j = density(f, 0) * score(f, 0) * score(f, 0) + density(f, 1) * score(f, 1) * score(f, 1);
    CHECK(fisher_info(f).fisher == doctest::Approx(j).epsilon(1e-13));
    CHECK(fisher_info(f).min_eigenvalue > 0.0);
  }
}

TEST_CASE("score has mean zero and variance J") {
  const std::size_t reps = 100000;
  for (const auto& f : interior_points()) {
    Rng rng = Rng::stream(3, hash_name("score-moments"), static_cast<std::uint64_t>(f.theta * 1000 + 7));
    double s = 0.0, s2 = 0.0, s4 = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
      const double v = score(f, sample_one(f, rng));
      s += v;
      s2 += v * v;
      s4 += v * v * v * v;
    }
    const double n = static_cast<double>(reps);
    const double j = fisher_info(f).fisher;
    CHECK(std::fabs(s / n) < 4.0 * std::sqrt(j / n));
    const double se = std::sqrt((s4 / n - (s2 / n) * (s2 / n)) / n);
    // Bernoulli(1/2) has a constant squared score, so se can be 0.
    CHECK(std::fabs(s2 / n - j) <= 4.0 * se + 1e-9 * j);
  }
}

TEST_CASE("sampler moments") {
  Rng rng(17);
  const auto b = sample(FamilyPoint(FamilyKind::bernoulli, 0.3), 100000, rng);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
  CHECK(std::fabs(mb - 0.3) < 4.0 * std::sqrt(0.21 / 1e5));
  const auto p = sample(FamilyPoint(FamilyKind::poisson, 4.0), 100000, rng);
  const double mp = std::accumulate(p.begin(), p.end(), 0.0) / p.size();
  double vp = 0.0;
  for (double x : p) vp += (x - mp) * (x - mp);
  vp /= p.size() - 1;
  CHECK(std::fabs(vp - 4.0) < 4.0 * std::sqrt((4.0 + 2 * 16.0) / 1e5));
  // Large-mean Poisson path.
  const auto big = sample(FamilyPoint(FamilyKind::poisson, 80.0), 50000, rng);
  const double mbig = std::accumulate(big.begin(), big.end(), 0.0) / big.size();
  CHECK(std::fabs(mbig - 80.0) < 4.0 * std::sqrt(80.0 / 5e4));
}

TEST_CASE("sufficient statistic") {
  const std::vector<double> b{1, 0, 1};
  CHECK(suff_stat(FamilyPoint(FamilyKind::bernoulli, 0.5), b) == 2.0);
  const std::vector<double> p{0, 3};
  CHECK(suff_stat(FamilyPoint(FamilyKind::poisson, 1.0), p) == 3.0);
  const std::vector<double> g{0.5, -0.5};
  CHECK(suff_stat(FamilyPoint(FamilyKind::gauss_location, 0.0), g) == 0.0);
}

TEST_CASE("score is affine in the statistic") {
  Rng rng(4);
  for (const auto& f : interior_points()) {
    const Sample data = sample(f, 37, rng);
    double direct = 0.0;
    for (double w : data) direct += score(f, w);
    direct /= std::sqrt(37.0);
    const ScoreAffine a = score_affine(f);
    CHECK((suff_stat(f, data) - 37 * a.centre) * a.slope / std::sqrt(37.0) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("domain clipping") {
  CHECK_THROWS_AS(FamilyPoint(FamilyKind::bernoulli, 1.0), DomainError);
  CHECK_THROWS_AS(FamilyPoint(FamilyKind::poisson, 0.0), DomainError);
  CHECK(clip_theta(FamilyKind::bernoulli, 0.0, 10) == doctest::Approx(0.1));
  CHECK(clip_theta(FamilyKind::bernoulli, 1.0, 10) == doctest::Approx(0.9));
  CHECK(clip_theta(FamilyKind::poisson, 0.0, 4) == doctest::Approx(0.25));
  CHECK(clip_theta(FamilyKind::bernoulli, 0.0, 1) == doctest::Approx(0.5));
}

TEST_CASE("randomized rounding preserves the mean") {
  Rng rng(8);
  double s = 0.0;
  const std::size_t reps = 100000;
  for (std::size_t i = 0; i < reps; ++i) s += static_cast<double>(randomized_round(3.25, rng));
  CHECK(std::fabs(s / reps - 3.25) < 4.0 * std::sqrt(0.25 * 0.75 / reps));
  CHECK(randomized_round(5.0, rng) == 5);
}

TEST_CASE("conditional resampling hits the target") {
  Rng rng(9);
  std::map<std::vector<double>, int> seen;
  for (int i = 0; i < 3000; ++i) {
    const auto r = conditional_resample(FamilyPoint(FamilyKind::bernoulli, 0.5), 3, 2.0, rng);
    CHECK(r.realized_stat == 2.0);
    ++seen[r.data];
  }
  CHECK(seen.size() == 3);
  for (const auto& [k, c] : seen) CHECK(std::abs(c - 1000) < 4 * std::sqrt(3000 * (1.0 / 3) * (2.0 / 3)));

  const auto g = conditional_resample(FamilyPoint(FamilyKind::gauss_location, 0.0, 1.0), 2, 4.0, rng);
  CHECK((g.data[0] + g.data[1]) / 2 == doctest::Approx(2.0).epsilon(1e-14));

  const auto clipped = conditional_resample(FamilyPoint(FamilyKind::bernoulli, 0.5), 4, 7.0, rng);
  CHECK(clipped.clipped);
  CHECK(clipped.realized_stat == 4.0);
  const auto below = conditional_resample(FamilyPoint(FamilyKind::poisson, 1.0), 4, -2.0, rng);
  CHECK(below.clipped);
  CHECK(below.realized_stat == 0.0);

  const auto p = conditional_resample_exact(FamilyPoint(FamilyKind::poisson, 1.0), 5, 12, rng);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == 12.0);
}

TEST_CASE("resampling on the own statistic leaves the law invariant") {
  // Bernoulli(0.3), n = 20: the count law after resampling is Binomial(20, 0.3),
  // and the position of the ones stays exchangeable.
  const FamilyPoint f(FamilyKind::bernoulli, 0.3);
  const std::size_t reps = 100000;
  std::vector<std::size_t> counts(21, 0);
  std::size_t first_one = 0;
  for (std::size_t i = 0; i < reps; ++i) {
    Rng rng = Rng::stream(21, hash_name("law-invariance"), i);
    const Sample x = sample(f, 20, rng);
    const auto y = conditional_resample(f, 20, suff_stat(f, x), rng);
    ++counts[static_cast<std::size_t>(y.realized_stat)];
    first_one += y.data[0] == 1.0;
  }
  const auto pmf = stat_pmf(f, 20);
  const GofResult gof = chi_square_gof(counts, pmf);
  CHECK(gof.p_value > 0.01);
  CHECK(std::fabs(first_one / static_cast<double>(reps) - 0.3) < 4.0 * std::sqrt(0.21 / reps));
}

TEST_CASE("gaussian bridge preserves the law") {
  // N(1, 4) data resampled on its own mean: still i.i.d. N(1, 4).
  const FamilyPoint f(FamilyKind::gauss_location, 1.0, 2.0);
  const std::size_t reps = 50000;
  double s = 0.0, s2 = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < reps; ++i) {
    Rng rng = Rng::stream(22, hash_name("bridge"), i);
    const Sample x = sample(f, 5, rng);
    const auto y = conditional_resample(f, 5, suff_stat(f, x), rng);
    s += y.data[0];
    s2 += (y.data[0] - 1.0) * (y.data[0] - 1.0);
    cross += (y.data[0] - 1.0) * (y.data[1] - 1.0);
  }
  const double n = static_cast<double>(reps);
  CHECK(std::fabs(s / n - 1.0) < 4.0 * std::sqrt(4.0 / n));
  CHECK(std::fabs(s2 / n - 4.0) < 4.0 * 4.0 * std::sqrt(2.0 / n));
  CHECK(std::fabs(cross / n) < 4.0 * 4.0 / std::sqrt(n));
}

TEST_CASE("statistic pmf") {
  const auto b = stat_pmf(FamilyPoint(FamilyKind::bernoulli, 0.3), 4);
  REQUIRE(b.size() == 5);
  CHECK(b[0] == doctest::Approx(std::pow(0.7, 4)).epsilon(1e-14));
  CHECK(b[2] == doctest::Approx(6 * 0.09 * 0.49).epsilon(1e-14));
  const auto p = stat_pmf(FamilyPoint(FamilyKind::poisson, 2.0), 3);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p[0] == doctest::Approx(std::exp(-6.0)).epsilon(1e-12));
}

TEST_CASE("moment generating function of the scaled score") {
  // E exp(h l^n) <= exp(h^2 J) (1 + tol) for n >= 64, |h| <= 2.
  for (const auto& f : {FamilyPoint(FamilyKind::bernoulli, 0.4), FamilyPoint(FamilyKind::poisson, 3.0)}) {
    const double j = fisher_info(f).fisher;
    const std::size_t n = 64;
    const auto pmf = stat_pmf(f, n);
    const ScoreAffine a = score_affine(f);
    for (double h : {-2.0, -1.0, 1.0, 2.0}) {
      double mgf = 0.0;
      for (std::size_t k = 0; k < pmf.size(); ++k) {
        mgf += pmf[k] * std::exp(h * (k - n * a.centre) * a.slope / std::sqrt(static_cast<double>(n)));
      }
      CHECK(std::isfinite(mgf));
      CHECK(mgf <= std::exp(h * h * j) * 1.05);
    }
  }
}

TEST_CASE("family ids") {
  CHECK(family_from_id("bernoulli") == FamilyKind::bernoulli);
  CHECK(family_from_id("poisson") == FamilyKind::poisson);
  CHECK(family_from_id("gauss-loc") == FamilyKind::gauss_location);
  CHECK(family_id(FamilyKind::gauss_location) == "gauss-loc");
  CHECK_THROWS(family_from_id("cauchy"));
}
