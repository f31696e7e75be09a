#include <doctest.h>

#include <cmath>
#include <sstream>

#include "clonekit/error.hpp"
#include "clonekit/families.hpp"
#include "clonekit/rng.hpp"
#include "clonekit/tv.hpp"

using namespace clonekit;

TEST_CASE("pmf_l1 examples") {
  const auto p = EmpiricalLaw::from_parts({0, 1}, {0.5, 0.5});
  const auto q = EmpiricalLaw::from_parts({0, 1}, {0.75, 0.25});
  CHECK(pmf_l1(p, p) == 0.0);
  CHECK(pmf_l1(EmpiricalLaw::point_mass(0), EmpiricalLaw::point_mass(1)) == 2.0);
  CHECK(pmf_l1(p, q) == doctest::Approx(0.5));
  CHECK(pmf_tv(p, q) == doctest::Approx(0.25));
}

TEST_CASE("pmf_l1 is a metric") {
  Rng rng(1);
  auto random_law = [&] {
    std::vector<double> w(8);
    double t = 0.0;
    for (auto& v : w) t += (v = rng.uniform());
    for (auto& v : w) v /= t;
    return EmpiricalLaw::from_dense(w, static_cast<std::int64_t>(rng() % 4));
  };
  for (int i = 0; i < 200; ++i) {
    const auto a = random_law(), b = random_law(), c = random_law();
    CHECK(pmf_l1(a, b) == pmf_l1(b, a));
    CHECK(pmf_l1(a, c) <= pmf_l1(a, b) + pmf_l1(b, c) + 1e-12);
    CHECK(pmf_l1(a, b) >= 0.0);
    CHECK(pmf_l1(a, b) <= 2.0 + 1e-12);
  }
}

TEST_CASE("empirical pmf") {
  const std::vector<std::int64_t> s{0, 1, 1};
  const auto e = empirical_pmf(s);
  CHECK(e.at(0) == doctest::Approx(1.0 / 3));
  CHECK(e.at(1) == doctest::Approx(2.0 / 3));
  CHECK(e.sample_count == 3);
  const std::vector<std::int64_t> single{7};
  CHECK(empirical_pmf(single).at(7) == 1.0);
  const std::vector<std::int64_t> shuffled{1, 0, 1};
  CHECK(empirical_pmf(shuffled).mass == e.mass);
  CHECK_THROWS_AS(empirical_pmf(std::vector<std::int64_t>{}), DomainError);
}

TEST_CASE("empirical binomial law is close to exact") {
  Rng rng(2);
  const FamilyPoint f(FamilyKind::bernoulli, 0.5);
  std::vector<std::int64_t> draws(100000);
  for (auto& d : draws) d = static_cast<std::int64_t>(suff_stat(f, sample(f, 10, rng)));
  const auto exact = EmpiricalLaw::from_dense(stat_pmf(f, 10));
  CHECK(pmf_l1(empirical_pmf(draws), exact) < 0.02);
}

TEST_CASE("mixture pmf") {
  const auto a = EmpiricalLaw::point_mass(3);
  std::vector<std::pair<EmpiricalLaw, double>> one{{a, 1.0}};
  CHECK(pmf_l1(mixture_pmf(one), a) == 0.0);
  std::vector<std::pair<EmpiricalLaw, double>> two{{EmpiricalLaw::point_mass(0), 0.5},
                                                   {EmpiricalLaw::point_mass(5), 0.5}};
  const auto m = mixture_pmf(two);
  CHECK(m.at(0) == 0.5);
  CHECK(m.at(5) == 0.5);
  std::vector<std::pair<EmpiricalLaw, double>> bad{{a, 0.4}, {a, 0.4}};
  CHECK_THROWS_AS(mixture_pmf(bad), DomainError);
}

TEST_CASE("law validation") {
  CHECK_THROWS_AS(EmpiricalLaw::from_parts({1, 0}, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(EmpiricalLaw::from_parts({0, 1}, {0.5, 0.6}), DomainError);
  CHECK_THROWS_AS(EmpiricalLaw::from_parts({0, 1}, {1.5, -0.5}), DomainError);
}

TEST_CASE("csv round trip") {
  const auto law = EmpiricalLaw::from_parts({-2, 0, 9}, {0.1, 0.2, 0.7});
  std::stringstream ss;
  write_csv(ss, law);
  CHECK(ss.str().rfind("#", 0) == 0);
  CHECK(ss.str().find("point,mass\n") != std::string::npos);
  const auto back = read_csv(ss);
  CHECK(back.support == law.support);
  CHECK(back.mass == law.mass);
}
