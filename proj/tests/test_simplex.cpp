#include <doctest.h>

#include <cmath>
#include <vector>

#include "clonekit/error.hpp"
#include "clonekit/simplex.hpp"

using namespace clonekit;
using namespace clonekit::lp;

namespace {

// Builds a standard-form LP from a dense matrix.
StandardFormLp dense_lp(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                        const std::vector<double>& c) {
  StandardFormLp lp;
  lp.num_rows = static_cast<int>(a.size());
  lp.rhs = b;
  for (std::size_t j = 0; j < c.size(); ++j) {
    Column col;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i][j] != 0.0) {
        col.rows.push_back(static_cast<int>(i));
        col.values.push_back(a[i][j]);
      }
    }
    lp.add_column(c[j], std::move(col));
  }
  return lp;
}

}  // namespace

TEST_CASE("two-variable LP with slacks") {
  // min -x1 - x2  s.t.  x1 + 2 x2 <= 4,  3 x1 + x2 <= 6.
  const auto lp = dense_lp({{1, 2, 1, 0}, {3, 1, 0, 1}}, {4, 6}, {-1, -1, 0, 0});
  const SimplexResult r = solve(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.objective == doctest::Approx(-2.8).epsilon(1e-12));
  CHECK(r.x[0] == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(r.x[1] == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(r.duals[0] == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK(r.duals[1] == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(r.dual_objective == doctest::Approx(r.objective).epsilon(1e-12));
  CHECK(r.max_dual_infeasibility <= 1e-9);
  CHECK(r.max_primal_residual <= 1e-12);
}

TEST_CASE("warm start skips phase one") {
  const auto lp = dense_lp({{1, 2, 1, 0}, {3, 1, 0, 1}}, {4, 6}, {-1, -1, 0, 0});
  SimplexOptions opt;
  opt.initial_basis = {2, 3};
  const SimplexResult r = solve(lp, opt);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK_FALSE(r.used_phase_one);
  CHECK(r.objective == doctest::Approx(-2.8));

  // An optimal starting basis needs no pivots.
  opt.initial_basis = {0, 1};
  const SimplexResult r2 = solve(lp, opt);
  CHECK(r2.iterations == 0);
  CHECK(r2.objective == doctest::Approx(-2.8));

  // An infeasible starting basis falls back to phase one.
  const auto lp2 = dense_lp({{1, 1, 1, 0}, {1, -1, 0, 1}}, {2, -1}, {1, 1, 0, 0});
  opt.initial_basis = {2, 3};
  const SimplexResult r3 = solve(lp2, opt);
  REQUIRE(r3.status == LpStatus::optimal);
  CHECK(r3.used_phase_one);
  CHECK(r3.objective == doctest::Approx(1.0));
}

TEST_CASE("infeasible and unbounded") {
  const auto infeasible = dense_lp({{1, 1}}, {-1}, {1, 1});
  CHECK(solve(infeasible).status == LpStatus::infeasible);

  const auto unbounded = dense_lp({{1, -1}}, {1}, {-1, 0});
  CHECK(solve(unbounded).status == LpStatus::unbounded);
}

TEST_CASE("degenerate cycling example") {
  // Classic example on which Dantzig pricing with naive ties cycles.
  const auto lp = dense_lp({{1, 0, 0, 0.25, -8, -1, 9}, {0, 1, 0, 0.5, -12, -0.5, 3}, {0, 0, 1, 0, 0, 1, 0}},
                           {0, 0, 1}, {0, 0, 0, -0.75, 20, -0.5, 6});
  for (bool bland : {false, true}) {
    SimplexOptions opt;
    opt.bland_only = bland;
    opt.bland_after_degenerate = 2;
    const SimplexResult r = solve(lp, opt);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == doctest::Approx(-1.25).epsilon(1e-12));
    CHECK(r.x[0] == doctest::Approx(0.75));
    CHECK(r.x[3] == doctest::Approx(1.0));
    CHECK(r.x[5] == doctest::Approx(1.0));
    CHECK(r.dual_objective == doctest::Approx(-1.25).epsilon(1e-12));
  }
}

TEST_CASE("redundant equality rows") {
  // min x1  s.t.  x1 + x2 = 1,  2 x1 + 2 x2 = 2.
  const auto lp = dense_lp({{1, 1}, {2, 2}}, {1, 2}, {1, 0});
  const SimplexResult r = solve(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.objective == doctest::Approx(0.0));
  CHECK(r.x[1] == doctest::Approx(1.0));
  CHECK(r.max_primal_residual <= 1e-12);
}

TEST_CASE("transportation problem") {
  // Two supplies (3, 2), two demands (4, 1); costs 1 2 / 3 1.
  const auto lp = dense_lp({{1, 1, 0, 0}, {0, 0, 1, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}}, {3, 2, 4, 1}, {1, 2, 3, 1});
  const SimplexResult r = solve(lp);
  REQUIRE(r.status == LpStatus::optimal);
  // x11 = 3, x21 = 1, x22 = 1.
  CHECK(r.objective == doctest::Approx(7.0));
}

TEST_CASE("iteration limit and malformed input") {
  const auto lp = dense_lp({{1, 2, 1, 0}, {3, 1, 0, 1}}, {4, 6}, {-1, -1, 0, 0});
  SimplexOptions opt;
  opt.max_iterations = 0;
  opt.initial_basis = {2, 3};
  CHECK(solve(lp, opt).status == LpStatus::iteration_limit);

  StandardFormLp bad = lp;
  bad.rhs.pop_back();
  CHECK_THROWS_AS(solve(bad), ConfigError);
  StandardFormLp bad2 = lp;
  bad2.columns[0].rows[0] = 5;
  CHECK_THROWS_AS(solve(bad2), ConfigError);

  CHECK(to_string(LpStatus::optimal) == "optimal");
}
