#include "clonekit/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "clonekit/error.hpp"
#include "clonekit/quadrature.hpp"
#include "clonekit/special.hpp"

namespace clonekit {

namespace {

constexpr double kQuadratureHalfWidth = 12.0;
constexpr double kQuadratureTolerance = 1e-6;

Eigen::MatrixXd checked_cholesky(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) throw DomainError("covariance must be a nonempty square matrix");
  const double scale = cov.cwiseAbs().maxCoeff();
  if (!((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale)) {
    throw DomainError("covariance must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  Eigen::MatrixXd l = llt.matrixL();
  if (!(l.diagonal().minCoeff() > 0.0)) throw NumericalError("covariance is not positive definite");
  return l;
}

}  // namespace

GaussianShift::GaussianShift(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() != cov_.rows()) throw DomainError("mean and covariance dimensions differ");
  chol_ = checked_cholesky(cov_);
  const double log_det = 2.0 * chol_.diagonal().array().log().sum();
  log_norm_ = -0.5 * (dim() * std::log(2.0 * std::numbers::pi) + log_det);
}

GaussianShift GaussianShift::standard(int dim) {
  return GaussianShift(Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim));
}

GaussianShift GaussianShift::isotropic(Eigen::VectorXd mean, double scale) {
  const auto m = mean.size();
  return GaussianShift(std::move(mean), scale * Eigen::MatrixXd::Identity(m, m));
}

double GaussianShift::log_density(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd z = chol_.triangularView<Eigen::Lower>().solve(x - mean_);
  return log_norm_ - 0.5 * z.squaredNorm();
}

double GaussianShift::density(const Eigen::VectorXd& x) const { return std::exp(log_density(x)); }

Eigen::VectorXd GaussianShift::sample(Rng& rng) const {
  Eigen::VectorXd z(dim());
  for (int i = 0; i < dim(); ++i) z[i] = rng.normal();
  return mean_ + chol_ * z;
}

std::string_view to_string(TvMethod method) {
  switch (method) {
    case TvMethod::closed_form: return "closed_form";
    case TvMethod::quadrature: return "quadrature";
    case TvMethod::monte_carlo: return "monte_carlo";
    case TvMethod::ball_indicator: return "ball_indicator";
  }
  return "unknown";
}

TvMethod tv_method_from_string(std::string_view name) {
  if (name == "closed_form") return TvMethod::closed_form;
  if (name == "quadrature") return TvMethod::quadrature;
  if (name == "monte_carlo") return TvMethod::monte_carlo;
  if (name == "ball_indicator") return TvMethod::ball_indicator;
  throw ConfigError("unknown tv method '" + std::string(name) + "'");
}

double crossing_radius_sq(double r, int m) {
  if (m < 1) throw DomainError("crossing_radius_sq: dimension must be >= 1");
  if (!(r > 1.0)) throw DomainError("crossing_radius_sq: r must exceed 1");
  // log(r)/(r-1) loses digits as r -> 1; log1p keeps them.
  const double u = r - 1.0;
  return m * r * std::log1p(u) / u;
}

TvResult tv_isotropic(double r, int m) {
  if (m < 1) throw DomainError("tv_isotropic: dimension must be >= 1");
  if (!(r >= 1.0)) throw DomainError("tv_isotropic: r must be >= 1");
  TvResult out;
  out.method = TvMethod::closed_form;
  if (r == 1.0) {
    out.value = 0.0;
    out.crossing_radius_sq = static_cast<double>(m);
    return out;
  }
  const double t = crossing_radius_sq(r, m);
  out.crossing_radius_sq = t;
  out.value = 2.0 * (chi2_cdf(m, t) - chi2_cdf(m, t / r));
  return out;
}

TvResult tv_numeric(const GaussianShift& p, const GaussianShift& q, TvMethod method, std::size_t budget, Rng& rng) {
  if (p.dim() != q.dim()) throw DomainError("tv_numeric: dimension mismatch");
  const int m = p.dim();
  TvResult out;
  out.method = method;

  if (method == TvMethod::quadrature) {
    if (m > 2) throw UnsupportedError("tv_numeric: quadrature supports m <= 2 only");
    // Whiten by p: p becomes N(0, 1), q becomes N(W(mu_q - mu_p), W Sigma_q W^T).
    const Eigen::MatrixXd w = whiten(p.cov());
    const GaussianShift pw = GaussianShift::standard(m);
    Eigen::MatrixXd qcov = w * q.cov() * w.transpose();
    qcov = 0.5 * (qcov + qcov.transpose());
    const GaussianShift qw(w * (q.mean() - p.mean()), qcov);
    if (m == 1) {
      Eigen::VectorXd y(1);
      auto f = [&](double x) {
        y[0] = x;
        return std::fabs(pw.density(y) - qw.density(y));
      };
      out.value = adaptive_simpson(f, -kQuadratureHalfWidth, kQuadratureHalfWidth, kQuadratureTolerance).value;
    } else {
      Eigen::VectorXd y(2);
      auto f = [&](double a, double b) {
        y[0] = a;
        y[1] = b;
        return std::fabs(pw.density(y) - qw.density(y));
      };
      out.value = adaptive_simpson_2d(f, -kQuadratureHalfWidth, kQuadratureHalfWidth, kQuadratureTolerance).value;
    }
    out.value = std::clamp(out.value, 0.0, 2.0);
    return out;
  }

  if (method == TvMethod::monte_carlo) {
    if (budget == 0) throw DomainError("tv_numeric: budget must be positive");
    // One pass per side: E_p[(1 - q/p)^+] and E_q[(1 - p/q)^+].
    auto side = [&](const GaussianShift& from, const GaussianShift& other, double& mean, double& var) {
      double sum = 0.0;
      double sum_sq = 0.0;
      for (std::size_t i = 0; i < budget; ++i) {
        const Eigen::VectorXd x = from.sample(rng);
        const double v = std::max(0.0, 1.0 - std::exp(other.log_density(x) - from.log_density(x)));
        sum += v;
        sum_sq += v * v;
      }
      const double n = static_cast<double>(budget);
      mean = sum / n;
      var = std::max(0.0, sum_sq / n - mean * mean);
    };
    double m1 = 0.0, v1 = 0.0, m2 = 0.0, v2 = 0.0;
    side(p, q, m1, v1);
    side(q, p, m2, v2);
    const double n = static_cast<double>(budget);
    out.value = std::clamp(m1 + m2, 0.0, 2.0);
    out.std_error = std::sqrt(v1 / n + v2 / n);
    return out;
  }

  throw UnsupportedError("tv_numeric: method must be quadrature or monte_carlo");
}

TvResult tv_ball_indicator(double r, int m, std::size_t budget, Rng& rng) {
  if (m < 1 || budget == 0) throw DomainError("tv_ball_indicator: need m >= 1 and budget > 0");
  if (!(r >= 1.0)) throw DomainError("tv_ball_indicator: r must be >= 1");
  TvResult out;
  out.method = TvMethod::ball_indicator;
  if (r == 1.0) return out;
  const double t = crossing_radius_sq(r, m);
  out.crossing_radius_sq = t;
  // Paired draw: indicator(|Z|^2 <= t) - indicator(r |Z|^2 <= t) with one Z.
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < budget; ++i) {
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
      const double z = rng.normal();
      s += z * z;
    }
    const double v = 2.0 * ((s <= t ? 1.0 : 0.0) - (r * s <= t ? 1.0 : 0.0));
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(budget);
  out.value = sum / n;
  out.std_error = std::sqrt(std::max(0.0, sum_sq / n - out.value * out.value) / n);
  return out;
}

Eigen::MatrixXd whiten(const Eigen::MatrixXd& cov) {
  const Eigen::MatrixXd l = checked_cholesky(cov);
  const auto m = l.rows();
  return l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(m, m));
}

}  // namespace clonekit
