#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clonekit/simplex.hpp"

namespace clonekit {

/// Parameter-indexed family of pmfs on a finite outcome set: probs(theta, k).
struct FiniteExperiment {
  std::vector<std::string> params;
  Eigen::MatrixXd probs;

  /// Validates nonnegativity and unit row sums (1e-12).
  static FiniteExperiment make(std::vector<std::string> params, Eigen::MatrixXd probs);

  int num_params() const { return static_cast<int>(probs.rows()); }
  int num_outcomes() const { return static_cast<int>(probs.cols()); }
};

/// Column-stochastic matrix: entry (y, x) is the probability of output y given input x.
struct MarkovKernel {
  Eigen::MatrixXd matrix;

  static MarkovKernel identity(int k);
  /// Throws DomainError unless columns are nonnegative and sum to 1 within 1e-9.
  void validate() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& pmf) const { return matrix * pmf; }
};

/// max_theta ||Lambda P_theta - Q_theta||_1
double kernel_loss(const MarkovKernel& kernel, const FiniteExperiment& source, const FiniteExperiment& target);

/// Which pair of Gaussian experiments to discretize.
enum class PairMode {
  amplification,  ///< N(h, S)            -> N(sqrt(r) h, S)
  amp1,           ///< N(sqrt(r) h, r S)  -> N(sqrt(r) h, S); identity kernel is optimal
  literal,        ///< N(h, S)            -> N(h, sqrt(r) S)
};

/// `count` lattice points lo = e_0 < ... < e_{count-1} = hi, i.e. count - 1
/// cells. The outer cells absorb the tails.
struct Lattice {
  double lo = -10.0;
  double hi = 10.0;
  int count = 201;

  int cells() const { return count - 1; }
};

struct GaussianPair {
  FiniteExperiment source;
  FiniteExperiment target;
  std::vector<double> cell_centres;
  /// Output cell nearest to the image of each input cell centre under the
  /// mean map of the mode; a good deterministic starting kernel.
  std::vector<int> natural_map;
};

/// Exact cell masses (CDF differences) of the two one-dimensional Gaussian
/// families over the shifts in h_list. `variance` is the scalar S. Throws
/// ConfigError when a source row puts more than 1e-6 in an outer cell.
GaussianPair discretize_gaussian_pair(std::span<const double> h_list, double variance, double r, const Lattice& grid,
                                      PairMode mode = PairMode::amplification);

struct DeficiencyOptions {
  std::size_t max_kernel_entries = 40000;
  /// Starting deterministic kernel (input cell -> output cell). Defaults to
  /// x -> argmax_y sum_theta P_theta(x) Q_theta(y).
  std::optional<std::vector<int>> start_map;
  /// Restrict to kernels invariant under an outcome-reversal symmetry of the
  /// pair when one exists. Exact: the optimum is unchanged.
  bool use_symmetry = true;
  lp::SimplexOptions simplex;
};

struct DeficiencyResult {
  double value = 0.0;          ///< LP optimum
  double kernel_value = 0.0;   ///< kernel_loss of the recovered kernel
  double dual_bound = 0.0;     ///< dual objective at the final basis
  MarkovKernel kernel;
  lp::LpStatus lp_status = lp::LpStatus::iteration_limit;
  std::size_t iterations = 0;
  bool used_symmetry = false;
};

/// inf over Markov kernels of max_theta ||Lambda P_theta - Q_theta||_1 as a
/// linear program:
///   min t  s.t.  sum_y Lambda(y|x) = 1,
///                (Lambda P_theta)_y - Q_theta(y) = e+ - e-,
///                sum_y (e+ + e-) <= t  for each theta.
/// The simplex starts from a deterministic kernel, which is always feasible.
DeficiencyResult lp_deficiency(const FiniteExperiment& source, const FiniteExperiment& target,
                               const DeficiencyOptions& options = {});

/// Plain-text matrix: "p K" on the first line, then p rows of K numbers.
void write_experiment(std::ostream& out, const FiniteExperiment& e);
FiniteExperiment read_experiment(std::istream& in);

/// Translation-invariant amplification check on the discrete torus Z_K^m.
/// Source N(mu, r 1) and target N(mu, 1) are discretized into K^m cells of
/// width 2 half_width / K (tails wrapped), with mu ranging over every cell
/// centre. With the full translation group as parameter set, averaging any
/// kernel over the group does not increase the loss, so the deficiency equals
/// the best convolution kernel. Invariance under coordinate sign flips and
/// permutations reduces that LP further to one variable per orbit.
struct CyclicDeficiencyResult {
  double value = 0.0;           ///< LP optimum
  double identity_value = 0.0;  ///< objective of the identity kernel, ||P_0 - Q_0||_1
  double dual_bound = 0.0;
  std::size_t orbits = 0;
  std::size_t iterations = 0;
  lp::LpStatus lp_status = lp::LpStatus::iteration_limit;
  std::vector<double> kernel;   ///< convolution weight per orbit element
};

CyclicDeficiencyResult cyclic_amp1_deficiency(double r, int m, int cells_per_axis, double half_width,
                                              const lp::SimplexOptions& options = {});

/// Unreduced one-dimensional cyclic pair (K parameters, K outcomes), for
/// checking the reduction against lp_deficiency.
GaussianPair cyclic_amp1_pair(double r, int cells, double half_width);

}  // namespace clonekit
