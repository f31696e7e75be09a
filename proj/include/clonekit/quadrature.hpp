#pragma once

#include <cmath>
#include <functional>

namespace clonekit {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

/// Adaptive Simpson on [lo, hi] to absolute tolerance `tol`. The interval is
/// pre-split into `initial_panels` pieces so narrow features are not skipped.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double lo, double hi, double tol,
                                  int initial_panels = 64, int max_depth = 48);

/// Nested adaptive Simpson over the square [lo, hi]^2.
QuadratureResult adaptive_simpson_2d(const std::function<double(double, double)>& f, double lo, double hi, double tol,
                                     int initial_panels = 64);

}  // namespace clonekit
