#include "clonekit/simplex.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "clonekit/error.hpp"

namespace clonekit::lp {

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::iteration_limit: return "iteration_limit";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

class Solver {
 public:
  Solver(const StandardFormLp& problem, const SimplexOptions& options)
      : p_(problem), o_(options), m_(problem.num_rows), n_real_(problem.num_columns()) {
    if (static_cast<int>(p_.rhs.size()) != m_ || static_cast<int>(p_.cost.size()) != n_real_) {
      throw ConfigError("simplex: inconsistent problem dimensions");
    }
    for (const auto& c : p_.columns) {
      if (c.rows.size() != c.values.size()) throw ConfigError("simplex: malformed column");
      for (int r : c.rows) {
        if (r < 0 || r >= m_) throw ConfigError("simplex: row index out of range");
      }
    }
    // One artificial per row, signed so that it is nonnegative at the slack start.
    artificial_.resize(m_);
    for (int i = 0; i < m_; ++i) artificial_[i] = {{i}, {p_.rhs[i] >= 0.0 ? 1.0 : -1.0}};
    barred_.assign(n_real_ + m_, 0);
    position_.assign(n_real_ + m_, -1);
  }

  SimplexResult run() {
    SimplexResult result;
    bool have_basis = false;
    if (static_cast<int>(o_.initial_basis.size()) == m_) have_basis = try_initial_basis();

    if (!have_basis) {
      result.used_phase_one = true;
      basis_.resize(m_);
      std::fill(position_.begin(), position_.end(), -1);
      for (int i = 0; i < m_; ++i) {
        basis_[i] = n_real_ + i;
        position_[n_real_ + i] = i;
      }
      cost_.assign(n_real_ + m_, 0.0);
      for (int i = 0; i < m_; ++i) cost_[n_real_ + i] = 1.0;
      if (!refactor()) throw NumericalError("simplex: artificial basis is singular");
      const LpStatus phase1 = iterate(result);
      if (phase1 == LpStatus::iteration_limit) return finish(result, phase1);
      double infeasibility = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (basis_[i] >= n_real_) infeasibility += std::max(0.0, xb_[i]);
      }
      double scale = 1.0;
      for (double b : p_.rhs) scale = std::max(scale, std::fabs(b));
      if (infeasibility > 1e3 * o_.feasibility_tol * scale) return finish(result, LpStatus::infeasible);
      drive_out_artificials();
    }

    for (int i = 0; i < m_; ++i) barred_[n_real_ + i] = 1;
    cost_.assign(n_real_ + m_, 0.0);
    std::copy(p_.cost.begin(), p_.cost.end(), cost_.begin());
    recompute();
    const LpStatus phase2 = iterate(result);
    return finish(result, phase2);
  }

 private:
  const Column& column(int j) const { return j < n_real_ ? p_.columns[j] : artificial_[j - n_real_]; }

  bool try_initial_basis() {
    basis_ = o_.initial_basis;
    std::fill(position_.begin(), position_.end(), -1);
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[i];
      if (j < 0 || j >= n_real_ || position_[j] >= 0) return false;
      position_[j] = i;
    }
    cost_.assign(n_real_ + m_, 0.0);
    std::copy(p_.cost.begin(), p_.cost.end(), cost_.begin());
    if (!refactor()) return false;
    for (int i = 0; i < m_; ++i) {
      if (xb_[i] < -o_.feasibility_tol) return false;
    }
    return true;
  }

  // Rebuilds the dense inverse from a sparse LU of the basis matrix.
  bool refactor() {
    Eigen::SparseMatrix<double> b(m_, m_);
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m_; ++i) {
      const Column& c = column(basis_[i]);
      for (std::size_t k = 0; k < c.rows.size(); ++k) trip.emplace_back(c.rows[k], i, c.values[k]);
    }
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(b);
    if (lu.info() != Eigen::Success) return false;
    binv_ = lu.solve(Eigen::MatrixXd::Identity(m_, m_));
    if (lu.info() != Eigen::Success || !binv_.allFinite()) return false;
    since_refactor_ = 0;
    recompute();
    return true;
  }

  void recompute() {
    Eigen::Map<const Eigen::VectorXd> rhs(p_.rhs.data(), m_);
    xb_ = binv_ * rhs;
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
    pi_ = binv_.transpose() * cb;
  }

  double reduced_cost(int j) const {
    const Column& c = column(j);
    double d = cost_[j];
    for (std::size_t k = 0; k < c.rows.size(); ++k) d -= pi_[c.rows[k]] * c.values[k];
    return d;
  }

  Eigen::VectorXd ftran(int j) const {
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m_);
    const Column& c = column(j);
    for (std::size_t k = 0; k < c.rows.size(); ++k) alpha.noalias() += c.values[k] * binv_.col(c.rows[k]);
    return alpha;
  }

  // Pivot column q into basis position r.
  void pivot(int q, int r, const Eigen::VectorXd& alpha, double reduced) {
    const double ar = alpha[r];
    double step = std::max(0.0, xb_[r]) / ar;
    xb_.noalias() -= step * alpha;
    xb_[r] = step;
    Eigen::RowVectorXd row = binv_.row(r) / ar;
    for (int c = 0; c < m_; ++c) {
      const double w = row[c];
      if (w == 0.0) continue;
      binv_.col(c).noalias() -= w * alpha;
      binv_(r, c) = w;
    }
    pi_.noalias() += reduced * row.transpose();
    position_[basis_[r]] = -1;
    basis_[r] = q;
    position_[q] = r;
    ++since_refactor_;
  }

  LpStatus iterate(SimplexResult& result) {
    const int n_total = n_real_ + m_;
    int degenerate_run = 0;
    bool verified = false;
    for (;;) {
      if (result.iterations >= o_.max_iterations) return LpStatus::iteration_limit;
      if (since_refactor_ >= o_.refactor_interval && !refactor()) {
        throw NumericalError("simplex: basis became singular");
      }
      const bool bland = o_.bland_only || degenerate_run >= o_.bland_after_degenerate;

      int q = -1;
      double best = -o_.optimality_tol;
      for (int j = 0; j < n_total; ++j) {
        if (position_[j] >= 0 || barred_[j]) continue;
        const double d = reduced_cost(j);
        if (bland) {
          if (d < -o_.optimality_tol) {
            q = j;
            best = d;
            break;
          }
        } else if (d < best) {
          best = d;
          q = j;
        }
      }
      if (q < 0) {
        if (verified || since_refactor_ == 0) return LpStatus::optimal;
        if (!refactor()) throw NumericalError("simplex: basis became singular");
        verified = true;
        continue;
      }
      verified = false;

      const Eigen::VectorXd alpha = ftran(q);
      const double tol = std::max(o_.pivot_tol, 1e-11 * alpha.cwiseAbs().maxCoeff());
      int r = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      if (bland) {
        // Textbook minimum ratio, smallest basic index on ties.
        for (int i = 0; i < m_; ++i) {
          if (alpha[i] <= tol) continue;
          const double ratio = std::max(0.0, xb_[i]) / alpha[i];
          if (r < 0 || ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && basis_[i] < basis_[r])) {
            best_ratio = r < 0 ? ratio : std::min(best_ratio, ratio);
            r = i;
          }
        }
      } else {
        // Harris two-pass: relaxed bound first, then the largest pivot under it.
        double bound = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m_; ++i) {
          if (alpha[i] > tol) bound = std::min(bound, (std::max(0.0, xb_[i]) + o_.feasibility_tol) / alpha[i]);
        }
        for (int i = 0; i < m_; ++i) {
          if (alpha[i] <= tol) continue;
          const double ratio = std::max(0.0, xb_[i]) / alpha[i];
          if (ratio <= bound && (r < 0 || alpha[i] > alpha[r])) r = i;
        }
        if (r >= 0) best_ratio = std::max(0.0, xb_[r]) / alpha[r];
      }
      if (r < 0) return LpStatus::unbounded;

      degenerate_run = best_ratio <= 1e-12 ? degenerate_run + 1 : 0;
      if (bland) ++result.bland_iterations;
      pivot(q, r, alpha, best);
      ++result.iterations;
    }
  }

  void drive_out_artificials() {
    for (int p = 0; p < m_; ++p) {
      if (basis_[p] < n_real_) continue;
      const Eigen::RowVectorXd rho = binv_.row(p);
      int best_j = -1;
      double best_v = o_.pivot_tol;
      for (int j = 0; j < n_real_; ++j) {
        if (position_[j] >= 0) continue;
        const Column& c = column(j);
        double v = 0.0;
        for (std::size_t k = 0; k < c.rows.size(); ++k) v += rho[c.rows[k]] * c.values[k];
        if (std::fabs(v) > best_v) {
          best_v = std::fabs(v);
          best_j = j;
        }
      }
      // No candidate: the row is redundant and the artificial stays basic at zero.
      if (best_j < 0) continue;
      const Eigen::VectorXd alpha = ftran(best_j);
      pivot(best_j, p, alpha, 0.0);
    }
    if (!refactor()) throw NumericalError("simplex: basis became singular");
  }

  SimplexResult finish(SimplexResult& result, LpStatus status) {
    result.status = status;
    result.x.assign(n_real_, 0.0);
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_real_) result.x[basis_[i]] = std::max(0.0, xb_[i]);
    }
    result.objective = 0.0;
    for (int j = 0; j < n_real_; ++j) result.objective += p_.cost[j] * result.x[j];
    result.duals.assign(pi_.data(), pi_.data() + pi_.size());
    result.dual_objective = 0.0;
    for (int i = 0; i < m_; ++i) result.dual_objective += p_.rhs[i] * pi_[i];
    result.max_dual_infeasibility = 0.0;
    for (int j = 0; j < n_real_; ++j) {
      double d = p_.cost[j];
      const Column& c = p_.columns[j];
      for (std::size_t k = 0; k < c.rows.size(); ++k) d -= pi_[c.rows[k]] * c.values[k];
      result.max_dual_infeasibility = std::max(result.max_dual_infeasibility, -d);
    }
    std::vector<double> residual(p_.rhs.begin(), p_.rhs.end());
    for (int j = 0; j < n_real_; ++j) {
      if (result.x[j] == 0.0) continue;
      const Column& c = p_.columns[j];
      for (std::size_t k = 0; k < c.rows.size(); ++k) residual[c.rows[k]] -= c.values[k] * result.x[j];
    }
    result.max_primal_residual = 0.0;
    for (double v : residual) result.max_primal_residual = std::max(result.max_primal_residual, std::fabs(v));
    return result;
  }

  const StandardFormLp& p_;
  const SimplexOptions& o_;
  int m_;
  int n_real_;
  std::vector<Column> artificial_;
  std::vector<int> basis_;
  std::vector<int> position_;
  std::vector<char> barred_;
  std::vector<double> cost_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  Eigen::VectorXd pi_;
  std::size_t since_refactor_ = 0;
};

}  // namespace

SimplexResult solve(const StandardFormLp& problem, const SimplexOptions& options) {
  Solver solver(problem, options);
  return solver.run();
}

}  // namespace clonekit::lp
