#include "clonekit/amplifier.hpp"

#include <algorithm>
#include <cmath>

#include "clonekit/error.hpp"

namespace clonekit {

RotationMatrix build_rotation(int r) {
  if (r < 1) throw DomainError("build_rotation: r must be >= 1");
  RotationMatrix out;
  out.r = r;
  out.entries = Eigen::MatrixXd::Identity(r, r);
  if (r == 1) return out;
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(r, 1.0 / std::sqrt(static_cast<double>(r)));
  Eigen::VectorXd v = -u;
  v[0] += 1.0;
  // H = I - 2 v v^T / (v^T v) is symmetric, orthogonal and maps e_1 to u.
  out.entries -= (2.0 / v.squaredNorm()) * (v * v.transpose());
  return out;
}

AmplifierSpec optimal_amplifier(double r) {
  if (!(r >= 1.0)) throw DomainError("optimal_amplifier: r must be >= 1");
  const double g = std::sqrt(r);
  return {g, g};
}

Eigen::VectorXd amplify(const Eigen::VectorXd& x, double r) {
  if (!(r >= 1.0)) throw DomainError("amplify: r must be >= 1");
  return std::sqrt(r) * x;
}

std::vector<Eigen::VectorXd> expand_to_clones_with_noise(const Eigen::VectorXd& y, const RotationMatrix& rotation,
                                                         const std::vector<Eigen::VectorXd>& noise) {
  const int r = rotation.r;
  if (static_cast<int>(noise.size()) != r - 1) throw DomainError("expand_to_clones: need r - 1 noise vectors");
  // X_i = sum_j O_{j,i} X'_j with X'_1 = y and X'_j = noise[j-2].
  std::vector<Eigen::VectorXd> clones(r, Eigen::VectorXd::Zero(y.size()));
  for (int i = 0; i < r; ++i) {
    clones[i] = rotation.entries(0, i) * y;
    for (int j = 1; j < r; ++j) {
      if (noise[j - 1].size() != y.size()) throw DomainError("expand_to_clones: noise dimension mismatch");
      clones[i] += rotation.entries(j, i) * noise[j - 1];
    }
  }
  return clones;
}

std::vector<Eigen::VectorXd> expand_to_clones(const Eigen::VectorXd& y, int r, const Eigen::MatrixXd& sigma, Rng& rng) {
  if (!y.allFinite()) throw DomainError("expand_to_clones: input must be finite");
  if (sigma.rows() != y.size()) throw DomainError("expand_to_clones: sigma dimension mismatch");
  const RotationMatrix rotation = build_rotation(r);
  const GaussianShift noise_law(Eigen::VectorXd::Zero(y.size()), sigma);
  std::vector<Eigen::VectorXd> noise;
  noise.reserve(r - 1);
  for (int j = 1; j < r; ++j) noise.push_back(noise_law.sample(rng));
  return expand_to_clones_with_noise(y, rotation, noise);
}

std::vector<Eigen::VectorXd> gaussian_clone(const Eigen::VectorXd& x, int r, const Eigen::MatrixXd& sigma, Rng& rng) {
  return expand_to_clones(amplify(x, static_cast<double>(r)), r, sigma, rng);
}

AmplifierLossReport amplifier_loss_mc(double r, const Eigen::MatrixXd& sigma, const std::vector<Eigen::VectorXd>& h_grid,
                                      std::size_t budget, Rng& rng, TvMethod method) {
  if (h_grid.empty()) throw DomainError("amplifier_loss_mc: h grid must be nonempty");
  if (!(r >= 1.0)) throw DomainError("amplifier_loss_mc: r must be >= 1");
  const int m = static_cast<int>(sigma.rows());
  if (m > 2) method = TvMethod::monte_carlo;
  if (method != TvMethod::quadrature && method != TvMethod::monte_carlo) {
    throw UnsupportedError("amplifier_loss_mc: method must be quadrature or monte_carlo");
  }
  AmplifierLossReport out;
  out.h_grid = h_grid;
  const double g = std::sqrt(r);
  for (const auto& h : h_grid) {
    if (h.size() != m) throw DomainError("amplifier_loss_mc: h dimension mismatch");
    const Eigen::VectorXd centre = g * h;
    const GaussianShift amplified(centre, r * sigma);
    const GaussianShift target(centre, sigma);
    out.per_h.push_back(tv_numeric(amplified, target, method, budget, rng));
  }
  auto [lo, hi] = std::minmax_element(out.per_h.begin(), out.per_h.end(),
                                      [](const TvResult& a, const TvResult& b) { return a.value < b.value; });
  out.infimum = lo->value;
  out.supremum = hi->value;
  return out;
}

}  // namespace clonekit
