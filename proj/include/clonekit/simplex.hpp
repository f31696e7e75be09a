#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace clonekit::lp {

/// Sparse column of the constraint matrix.
struct Column {
  std::vector<int> rows;
  std::vector<double> values;
};

/// min c^T x  subject to  A x = b,  x >= 0.
struct StandardFormLp {
  int num_rows = 0;
  std::vector<Column> columns;
  std::vector<double> cost;
  std::vector<double> rhs;

  int add_column(double c, Column col) {
    cost.push_back(c);
    columns.push_back(std::move(col));
    return static_cast<int>(columns.size()) - 1;
  }
  int num_columns() const { return static_cast<int>(columns.size()); }
};

enum class LpStatus { optimal, iteration_limit, infeasible, unbounded };

std::string_view to_string(LpStatus status);

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t max_iterations = 1'000'000;
  /// Column index per row. When it forms a primal feasible basis, phase I is skipped.
  std::vector<int> initial_basis;
  /// Consecutive degenerate pivots after which pricing falls back to Bland's
  /// smallest-index rule until the next nondegenerate step.
  int bland_after_degenerate = 50;
  /// Always use Bland's rule (slow but cycle-free from the start).
  bool bland_only = false;
  std::size_t refactor_interval = 400;
};

struct SimplexResult {
  LpStatus status = LpStatus::iteration_limit;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> duals;  ///< row prices pi with reduced costs c - A^T pi
  double dual_objective = 0.0;  ///< b^T pi
  double max_dual_infeasibility = 0.0;  ///< max over columns of (-reduced cost)^+
  double max_primal_residual = 0.0;     ///< ||A x - b||_inf
  std::size_t iterations = 0;
  std::size_t bland_iterations = 0;
  bool used_phase_one = false;
};

/// Revised primal simplex with an explicit dense basis inverse (rank-one
/// updates, periodic sparse-LU refactorization). Dantzig pricing with a
/// Bland's-rule fallback on degenerate stalls. Intended for small dense
/// problems with a few thousand rows.
SimplexResult solve(const StandardFormLp& problem, const SimplexOptions& options = {});

}  // namespace clonekit::lp
