#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "clonekit/gaussian.hpp"
#include "clonekit/rng.hpp"

namespace clonekit {

/// Orthogonal r x r matrix whose first row is (1/sqrt r, ..., 1/sqrt r).
/// Applied to r i.i.d. N(h, Sigma) vectors it concentrates the shift in the
/// first output (N(sqrt(r) h, Sigma)) and leaves the rest as pure N(0, Sigma) noise.
struct RotationMatrix {
  int r = 1;
  Eigen::MatrixXd entries;
};

/// Householder reflection sending e_1 to the normalized all-ones vector. The
/// reflection is symmetric, so its first row is that vector as well.
RotationMatrix build_rotation(int r);

/// The optimal Gaussian-shift amplifier is the pure scale map x -> sqrt(r) x.
struct AmplifierSpec {
  double scale = 1.0;
  double target_gain = 1.0;
};

AmplifierSpec optimal_amplifier(double r);

/// sqrt(r) * x. Accepts any real r >= 1.
Eigen::VectorXd amplify(const Eigen::VectorXd& x, double r);

/// Embeds y as the first of r coordinates, fills the others with N(0, sigma)
/// draws and rotates back with O^T. If y ~ N(sqrt(r) h, sigma) the output is
/// exactly r i.i.d. N(h, sigma) vectors.
std::vector<Eigen::VectorXd> expand_to_clones(const Eigen::VectorXd& y, int r, const Eigen::MatrixXd& sigma, Rng& rng);

/// Same, with the r-1 noise vectors supplied by the caller.
std::vector<Eigen::VectorXd> expand_to_clones_with_noise(const Eigen::VectorXd& y, const RotationMatrix& rotation,
                                                         const std::vector<Eigen::VectorXd>& noise);

/// One Gaussian (1, r)-clone: expand_to_clones(amplify(x, r), r, sigma).
std::vector<Eigen::VectorXd> gaussian_clone(const Eigen::VectorXd& x, int r, const Eigen::MatrixXd& sigma, Rng& rng);

struct AmplifierLossReport {
  std::vector<Eigen::VectorXd> h_grid;
  std::vector<TvResult> per_h;
  double supremum = 0.0;
  double infimum = 0.0;
};

/// ||N(sqrt(r) h, r sigma) - N(sqrt(r) h, sigma)||_1 for each h, which is the
/// loss of the scale amplifier at h. Method selection: quadrature for m <= 2
/// unless `method` forces monte_carlo; Monte Carlo always for m > 2.
AmplifierLossReport amplifier_loss_mc(double r, const Eigen::MatrixXd& sigma, const std::vector<Eigen::VectorXd>& h_grid,
                                      std::size_t budget, Rng& rng, TvMethod method = TvMethod::quadrature);

}  // namespace clonekit
