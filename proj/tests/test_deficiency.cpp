#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "clonekit/deficiency.hpp"
#include "clonekit/error.hpp"
#include "clonekit/gaussian.hpp"
#include "clonekit/rng.hpp"

using namespace clonekit;

namespace {

FiniteExperiment random_experiment(int p, int k, Rng& rng) {
  Eigen::MatrixXd m(p, k);
  for (int i = 0; i < p; ++i) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += (m(i, j) = rng.uniform());
    m.row(i) /= s;
  }
  return FiniteExperiment::make({}, m);
}

FiniteExperiment permute_outcomes(const FiniteExperiment& e, const std::vector<int>& perm) {
  Eigen::MatrixXd m(e.num_params(), e.num_outcomes());
  for (int j = 0; j < e.num_outcomes(); ++j) m.col(perm[static_cast<std::size_t>(j)]) = e.probs.col(j);
  return FiniteExperiment::make(e.params, m);
}

std::vector<double> shifts(double a, double step) {
  std::vector<double> h;
  const int k = static_cast<int>(std::lround(a / step));
  for (int i = -k; i <= k; ++i) h.push_back(i * step);
  return h;
}

void check_certificate(const DeficiencyResult& r, const FiniteExperiment& s, const FiniteExperiment& t) {
  REQUIRE(r.lp_status == lp::LpStatus::optimal);
  CHECK(std::fabs(r.value - r.dual_bound) < 1e-7);
  CHECK_NOTHROW(r.kernel.validate());
  CHECK(r.kernel_value == doctest::Approx(kernel_loss(r.kernel, s, t)).epsilon(1e-12));
  CHECK(std::fabs(r.kernel_value - r.value) < 1e-6);
}

}  // namespace

TEST_CASE("experiment and kernel validation") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.5, 0.6, 0.5;
  CHECK_THROWS_AS(FiniteExperiment::make({}, bad), DomainError);
  bad << 0.5, 0.5, -0.1, 1.1;
  CHECK_THROWS_AS(FiniteExperiment::make({}, bad), DomainError);
  Eigen::MatrixXd ok(2, 2);
  ok << 0.5, 0.5, 0.25, 0.75;
  const auto e = FiniteExperiment::make({}, ok);
  CHECK(e.params == std::vector<std::string>{"0", "1"});
  CHECK(kernel_loss(MarkovKernel::identity(2), e, e) == 0.0);
  MarkovKernel k{Eigen::MatrixXd::Constant(2, 2, 0.6)};
  CHECK_THROWS_AS(k.validate(), DomainError);
}

TEST_CASE("source equal to target has zero deficiency") {
  Rng rng(1);
  const auto e = random_experiment(4, 6, rng);
  const auto r = lp_deficiency(e, e);
  CHECK(std::fabs(r.value) < 1e-12);
  check_certificate(r, e, e);
}

TEST_CASE("a single parameter has zero deficiency") {
  Rng rng(2);
  const auto s = random_experiment(1, 5, rng);
  const auto t = random_experiment(1, 7, rng);
  const auto r = lp_deficiency(s, t);
  CHECK(std::fabs(r.value) < 1e-12);
  check_certificate(r, s, t);
}

TEST_CASE("uninformative source against point masses") {
  Eigen::MatrixXd sp(2, 3);
  sp << 0.2, 0.3, 0.5, 0.2, 0.3, 0.5;
  Eigen::MatrixXd tp(2, 2);
  tp << 1, 0, 0, 1;
  const auto s = FiniteExperiment::make({}, sp);
  const auto t = FiniteExperiment::make({}, tp);
  const auto r = lp_deficiency(s, t);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  check_certificate(r, s, t);
}

TEST_CASE("relabeling outcomes leaves the optimum unchanged") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = random_experiment(3, 5, rng);
    const auto t = random_experiment(3, 4, rng);
    std::vector<int> ps(5), pt(4);
    std::iota(ps.begin(), ps.end(), 0);
    std::iota(pt.begin(), pt.end(), 0);
    std::reverse(ps.begin(), ps.end());
    std::rotate(pt.begin(), pt.begin() + 1, pt.end());
    std::swap(ps[0], ps[2]);
    const auto base = lp_deficiency(s, t);
    const auto perm = lp_deficiency(permute_outcomes(s, ps), permute_outcomes(t, pt));
    check_certificate(base, s, t);
    CHECK(perm.value == doctest::Approx(base.value).epsilon(1e-9));
  }
}

TEST_CASE("discretization") {
  const Lattice grid{-8.0, 8.0, 161};
  const std::vector<double> h{-1.0, 0.0, 1.0};
  const auto pair = discretize_gaussian_pair(h, 1.0, 2.0, grid);
  REQUIRE(pair.source.num_outcomes() == 160);
  REQUIRE(pair.target.num_outcomes() == 160);
  CHECK(pair.cell_centres.size() == 160);
  CHECK(pair.natural_map.size() == 160);
  for (int t = 0; t < 3; ++t) {
    CHECK(std::fabs(pair.source.probs.row(t).sum() - 1.0) < 1e-12);
    CHECK(std::fabs(pair.target.probs.row(t).sum() - 1.0) < 1e-12);
  }
  // Cell mass matches the CDF difference: cell [0, 0.1] under N(0, 1).
  const int cell = 80;
  CHECK(pair.cell_centres[cell] == doctest::Approx(0.05));
  CHECK(pair.source.probs(1, cell) == doctest::Approx(0.039827837277028988).epsilon(1e-12));

  for (double r : {1.0, 2.0, 7.5}) {
    const std::vector<double> zero{0.0};
    const auto p0 = discretize_gaussian_pair(zero, 1.0, r, grid);
    CHECK((p0.source.probs - p0.target.probs).cwiseAbs().maxCoeff() == 0.0);
  }

  const Lattice narrow{-2.0, 2.0, 41};
  CHECK_THROWS_AS(discretize_gaussian_pair(h, 1.0, 2.0, narrow), ConfigError);
  CHECK_THROWS_AS(discretize_gaussian_pair(h, 1.0, 0.5, grid), DomainError);
  CHECK_THROWS_AS(discretize_gaussian_pair(std::vector<double>{}, 1.0, 2.0, grid), ConfigError);
}

TEST_CASE("size cap") {
  const Lattice grid{-8.0, 8.0, 161};
  const std::vector<double> h{-1.0, 0.0, 1.0};
  const auto pair = discretize_gaussian_pair(h, 1.0, 2.0, grid);
  DeficiencyOptions opt;
  opt.max_kernel_entries = 160 * 160 - 1;
  CHECK_THROWS_AS(lp_deficiency(pair.source, pair.target, opt), ConfigError);
}

TEST_CASE("gaussian deficiency: symmetry, monotonicity, closed-form bound") {
  const Lattice grid{-7.0, 7.0, 57};
  const double tv = tv_isotropic(2.0, 1).value;
  double previous = -1.0;
  for (double a : {0.0, 0.5, 1.0}) {
    const auto h = shifts(a, 0.5);
    const auto pair = discretize_gaussian_pair(h, 1.0, 2.0, grid);
    DeficiencyOptions sym;
    sym.start_map = pair.natural_map;
    const auto rs = lp_deficiency(pair.source, pair.target, sym);
    check_certificate(rs, pair.source, pair.target);
    CHECK(rs.used_symmetry);

    DeficiencyOptions plain = sym;
    plain.use_symmetry = false;
    const auto rp = lp_deficiency(pair.source, pair.target, plain);
    CHECK_FALSE(rp.used_symmetry);
    CHECK(std::fabs(rs.value - rp.value) < 1e-8);

    CHECK(rs.value >= previous - 1e-9);
    CHECK(rs.value <= tv + 0.02);
    previous = rs.value;
  }
  CHECK(previous > 0.1);
}

TEST_CASE("literal and amp1 modes") {
  const Lattice grid{-8.0, 8.0, 65};
  const std::vector<double> h{-0.5, 0.0, 0.5};
  const auto lit = discretize_gaussian_pair(h, 1.0, 2.0, grid, PairMode::literal);
  const auto rl = lp_deficiency(lit.source, lit.target);
  check_certificate(rl, lit.source, lit.target);
  // N(h, sqrt(r) S) is N(h, S) plus independent noise: adding noise is a perfect kernel.
  CHECK(rl.value < 1e-6);

  const auto a1 = discretize_gaussian_pair(h, 1.0, 2.0, grid, PairMode::amp1);
  const auto ra = lp_deficiency(a1.source, a1.target);
  check_certificate(ra, a1.source, a1.target);
  // The identity kernel is feasible.
  CHECK(ra.value <= kernel_loss(MarkovKernel::identity(64), a1.source, a1.target) + 1e-12);
}

TEST_CASE("cyclic reduction equals the full cyclic LP") {
  const auto pair = cyclic_amp1_pair(2.0, 15, 6.0);
  CHECK(pair.source.num_params() == 15);
  const auto full = lp_deficiency(pair.source, pair.target);
  check_certificate(full, pair.source, pair.target);

  const auto red = cyclic_amp1_deficiency(2.0, 1, 15, 6.0);
  REQUIRE(red.lp_status == lp::LpStatus::optimal);
  CHECK(red.value == doctest::Approx(full.value).epsilon(1e-9));
  CHECK(red.value == doctest::Approx(0.3320091374).epsilon(1e-8));
  CHECK(red.value <= red.identity_value + 1e-12);
  CHECK(std::fabs(red.value - red.dual_bound) < 1e-7);
  CHECK(red.orbits == 8);
  CHECK(red.identity_value == doctest::Approx(kernel_loss(MarkovKernel::identity(15), pair.source, pair.target)));

  const auto two = cyclic_amp1_deficiency(2.0, 2, 15, 6.0);
  REQUIRE(two.lp_status == lp::LpStatus::optimal);
  CHECK(two.orbits == 36);
  CHECK(two.value <= two.identity_value + 1e-12);
  CHECK(two.value > red.value);

  CHECK_THROWS_AS(cyclic_amp1_deficiency(2.0, 1, 14, 6.0), ConfigError);
  CHECK_THROWS_AS(cyclic_amp1_deficiency(0.5, 1, 15, 6.0), DomainError);
}

TEST_CASE("matrix format round trip") {
  Rng rng(4);
  const auto e = random_experiment(3, 7, rng);
  std::stringstream ss;
  write_experiment(ss, e);
  const auto back = read_experiment(ss);
  CHECK(back.probs == e.probs);

  std::istringstream truncated("2 3\n0.5 0.5 0\n1\n");
  CHECK_THROWS_AS(read_experiment(truncated), ConfigError);
  std::istringstream header("x 3\n");
  CHECK_THROWS_AS(read_experiment(header), ConfigError);
}
