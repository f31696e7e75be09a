#include "clonekit/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace clonekit {

namespace {

struct Simpson {
  const std::function<double(double)>& f;
  std::size_t evaluations = 0;
  int max_depth;

  double eval(double x) {
    ++evaluations;
    return f(x);
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth,
                 double& err) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
      err += std::fabs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err);
  }
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double lo, double hi, double tol,
                                  int initial_panels, int max_depth) {
  Simpson s{f, 0, max_depth};
  QuadratureResult out;
  const double width = (hi - lo) / initial_panels;
  const double panel_tol = tol / initial_panels;
  double fa = s.eval(lo);
  for (int i = 0; i < initial_panels; ++i) {
    const double a = lo + i * width;
    const double b = (i + 1 == initial_panels) ? hi : a + width;
    const double m = 0.5 * (a + b);
    const double fm = s.eval(m);
    const double fb = s.eval(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    out.value += s.recurse(a, b, fa, fm, fb, whole, panel_tol, max_depth, out.error_estimate);
    fa = fb;
  }
  out.evaluations = s.evaluations;
  return out;
}

QuadratureResult adaptive_simpson_2d(const std::function<double(double, double)>& f, double lo, double hi, double tol,
                                     int initial_panels) {
  const double span = hi - lo;
  std::size_t inner_evals = 0;
  double inner_err = 0.0;
  // Inner tolerance scaled so the accumulated inner error stays below tol/2.
  const double inner_tol = 0.5 * tol / span;
  auto inner = [&](double x) {
    auto g = [&](double y) { return f(x, y); };
    const QuadratureResult r = adaptive_simpson(g, lo, hi, inner_tol, initial_panels);
    inner_evals += r.evaluations;
    inner_err = std::max(inner_err, r.error_estimate);
    return r.value;
  };
  QuadratureResult outer = adaptive_simpson(inner, lo, hi, 0.5 * tol, initial_panels);
  outer.evaluations = inner_evals;
  outer.error_estimate += inner_err * span;
  return outer;
}

}  // namespace clonekit
