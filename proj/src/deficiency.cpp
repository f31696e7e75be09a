#include "clonekit/deficiency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "clonekit/error.hpp"
#include "clonekit/special.hpp"

namespace clonekit {

namespace {

// P(a < Z <= b) for standard normal Z, taken from the nearer tail.
double interval_mass(double a, double b) {
  if (b <= a) return 0.0;
  if (a > 0.0) return normal_cdf(-a) - normal_cdf(-b);
  return normal_cdf(b) - normal_cdf(a);
}

std::vector<double> cell_masses(double mean, double sd, const Lattice& grid) {
  const int cells = grid.cells();
  const double width = (grid.hi - grid.lo) / cells;
  const auto z = [&](int i) { return (grid.lo + i * width - mean) / sd; };
  std::vector<double> mass(cells);
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cells; ++i) {
    const double a = i == 0 ? -inf : z(i);
    const double b = i == cells - 1 ? inf : z(i + 1);
    mass[i] = interval_mass(a, b);
  }
  double total = 0.0;
  for (double v : mass) total += v;
  for (double& v : mass) v /= total;
  return mass;
}

}  // namespace

FiniteExperiment FiniteExperiment::make(std::vector<std::string> params, Eigen::MatrixXd probs) {
  if (probs.rows() == 0 || probs.cols() == 0) throw DomainError("experiment: empty probability matrix");
  if (!params.empty() && static_cast<Eigen::Index>(params.size()) != probs.rows()) {
    throw DomainError("experiment: label count does not match rows");
  }
  if (params.empty()) {
    for (Eigen::Index i = 0; i < probs.rows(); ++i) params.push_back(std::to_string(i));
  }
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    if (!probs.row(i).allFinite() || probs.row(i).minCoeff() < 0.0) {
      throw DomainError("experiment: negative or non-finite probability in row " + params[i]);
    }
    if (std::fabs(probs.row(i).sum() - 1.0) > 1e-12) {
      throw DomainError("experiment: row " + params[i] + " does not sum to 1");
    }
  }
  return {std::move(params), std::move(probs)};
}

MarkovKernel MarkovKernel::identity(int k) { return {Eigen::MatrixXd::Identity(k, k)}; }

void MarkovKernel::validate() const {
  for (Eigen::Index x = 0; x < matrix.cols(); ++x) {
    if (matrix.col(x).minCoeff() < 0.0 || std::fabs(matrix.col(x).sum() - 1.0) > 1e-9) {
      throw DomainError("kernel: column " + std::to_string(x) + " is not a probability vector");
    }
  }
}

double kernel_loss(const MarkovKernel& kernel, const FiniteExperiment& source, const FiniteExperiment& target) {
  if (source.num_params() != target.num_params()) throw DomainError("kernel_loss: parameter sets differ");
  if (kernel.matrix.cols() != source.num_outcomes() || kernel.matrix.rows() != target.num_outcomes()) {
    throw DomainError("kernel_loss: kernel shape does not match experiments");
  }
  double worst = 0.0;
  for (int t = 0; t < source.num_params(); ++t) {
    const Eigen::VectorXd pushed = kernel.matrix * source.probs.row(t).transpose();
    worst = std::max(worst, (pushed - target.probs.row(t).transpose()).lpNorm<1>());
  }
  return worst;
}

GaussianPair discretize_gaussian_pair(std::span<const double> h_list, double variance, double r, const Lattice& grid,
                                      PairMode mode) {
  if (h_list.empty()) throw ConfigError("discretize: empty shift list");
  if (!(variance > 0.0) || !std::isfinite(variance)) throw DomainError("discretize: variance must be positive");
  if (!(r >= 1.0) || !std::isfinite(r)) throw DomainError("discretize: r must be >= 1");
  if (grid.count < 3 || !(grid.hi > grid.lo)) throw ConfigError("discretize: lattice needs lo < hi and count >= 3");

  const double sd = std::sqrt(variance);
  const double root_r = std::sqrt(r);
  double src_sd = sd, tgt_sd = sd;
  if (mode == PairMode::amp1) src_sd = root_r * sd;
  if (mode == PairMode::literal) tgt_sd = std::sqrt(root_r) * sd;

  const int p = static_cast<int>(h_list.size());
  const int cells = grid.cells();
  Eigen::MatrixXd src(p, cells), tgt(p, cells);
  std::vector<std::string> labels;
  for (int t = 0; t < p; ++t) {
    const double h = h_list[t];
    const double src_mean = mode == PairMode::amp1 ? root_r * h : h;
    const double tgt_mean = mode == PairMode::literal ? h : root_r * h;
    const auto sm = cell_masses(src_mean, src_sd, grid);
    const auto tm = cell_masses(tgt_mean, tgt_sd, grid);
    if (sm.front() > 1e-6 || sm.back() > 1e-6) {
      std::ostringstream msg;
      msg << "discretize: lattice [" << grid.lo << ", " << grid.hi << "] too narrow for shift h = " << h;
      throw ConfigError(msg.str());
    }
    for (int i = 0; i < cells; ++i) {
      src(t, i) = sm[i];
      tgt(t, i) = tm[i];
    }
    std::ostringstream label;
    label.precision(17);
    label << h;
    labels.push_back(label.str());
  }
  std::vector<double> centres(cells);
  std::vector<int> natural(cells);
  const double width = (grid.hi - grid.lo) / cells;
  const double gain = mode == PairMode::amplification ? root_r : 1.0;
  for (int i = 0; i < cells; ++i) {
    centres[i] = grid.lo + (i + 0.5) * width;
    const double y = std::floor((gain * centres[i] - grid.lo) / width);
    natural[i] = static_cast<int>(std::clamp(y, 0.0, static_cast<double>(cells - 1)));
  }
  return {FiniteExperiment::make(labels, src), FiniteExperiment::make(labels, tgt), std::move(centres),
          std::move(natural)};
}

namespace {

// Involution on parameters under which reversing both outcome orders maps
// the pair of experiments to itself, if one exists.
std::optional<std::vector<int>> reflection_symmetry(const FiniteExperiment& source, const FiniteExperiment& target) {
  const int p = source.num_params();
  const int kin = source.num_outcomes();
  const int kout = target.num_outcomes();
  constexpr double tol = 1e-13;
  std::vector<int> partner(p, -1);
  for (int t = 0; t < p; ++t) {
    for (int u = 0; u < p && partner[t] < 0; ++u) {
      bool match = true;
      for (int x = 0; x < kin && match; ++x) match = std::fabs(source.probs(u, kin - 1 - x) - source.probs(t, x)) <= tol;
      for (int y = 0; y < kout && match; ++y) match = std::fabs(target.probs(u, kout - 1 - y) - target.probs(t, y)) <= tol;
      if (match) partner[t] = u;
    }
    if (partner[t] < 0) return std::nullopt;
  }
  for (int t = 0; t < p; ++t) {
    if (partner[partner[t]] != t) return std::nullopt;
  }
  return partner;
}

}  // namespace

DeficiencyResult lp_deficiency(const FiniteExperiment& source, const FiniteExperiment& target,
                               const DeficiencyOptions& options) {
  if (source.num_params() != target.num_params()) throw DomainError("deficiency: parameter sets differ");
  const int p = source.num_params();
  const int kin = source.num_outcomes();
  const int kout = target.num_outcomes();
  if (static_cast<std::size_t>(kin) * static_cast<std::size_t>(kout) > options.max_kernel_entries) {
    throw ConfigError("deficiency: kernel has " + std::to_string(static_cast<std::size_t>(kin) * kout) +
                      " entries, above the cap of " + std::to_string(options.max_kernel_entries));
  }
  if (options.start_map && static_cast<int>(options.start_map->size()) != kin) {
    throw ConfigError("deficiency: start map has the wrong length");
  }

  // Symmetry group {id, g}: g reverses outcomes and permutes parameters.
  // Averaging a kernel over the group never increases the worst-case loss,
  // so the LP may be restricted to invariant kernels. Without a symmetry
  // every orbit is a singleton.
  std::vector<int> partner(p);
  for (int t = 0; t < p; ++t) partner[t] = t;
  bool reflect = false;
  if (options.use_symmetry) {
    if (auto s = reflection_symmetry(source, target)) {
      partner = std::move(*s);
      reflect = true;
    }
  }
  const auto gin = [&](int x) { return reflect ? kin - 1 - x : x; };
  const auto gout = [&](int y) { return reflect ? kout - 1 - y : y; };

  std::vector<int> theta_reps;
  for (int t = 0; t < p; ++t) {
    if (partner[t] >= t) theta_reps.push_back(t);
  }
  std::vector<int> x_row(kin, -1);
  int nx = 0;
  for (int x = 0; x < kin; ++x) {
    if (gin(x) >= x) x_row[x] = nx++;
  }
  for (int x = 0; x < kin; ++x) {
    if (x_row[x] < 0) x_row[x] = x_row[gin(x)];
  }
  const int np = static_cast<int>(theta_reps.size());

  // Rows: (theta rep, y) balance, x-orbit normalization, theta-rep inequality.
  const int row_x0 = np * kout;
  const int row_t0 = row_x0 + nx;
  lp::StandardFormLp lp;
  lp.num_rows = row_t0 + np;
  lp.rhs.assign(lp.num_rows, 0.0);
  for (int i = 0; i < np; ++i) {
    for (int y = 0; y < kout; ++y) lp.rhs[i * kout + y] = target.probs(theta_reps[i], y);
  }
  for (int r = 0; r < nx; ++r) lp.rhs[row_x0 + r] = 1.0;

  // Kernel orbit variables; var_of maps each (x, y) to its orbit column.
  std::vector<int> var_of(static_cast<std::size_t>(kin) * kout, -1);
  for (int x = 0; x < kin; ++x) {
    if (gin(x) < x) continue;
    for (int y = 0; y < kout; ++y) {
      if (var_of[static_cast<std::size_t>(x) * kout + y] >= 0) continue;
      std::vector<std::pair<int, int>> members{{x, y}};
      if (reflect && !(gin(x) == x && gout(y) == y)) members.emplace_back(gin(x), gout(y));
      std::map<int, double> entries;
      for (const auto& [mx, my] : members) {
        for (int i = 0; i < np; ++i) {
          const double v = source.probs(theta_reps[i], mx);
          if (v != 0.0) entries[i * kout + my] += v;
        }
        if (mx == x) entries[row_x0 + x_row[x]] += 1.0;
      }
      lp::Column c;
      for (const auto& [row, v] : entries) {
        c.rows.push_back(row);
        c.values.push_back(v);
      }
      const int j = lp.add_column(0.0, std::move(c));
      for (const auto& [mx, my] : members) var_of[static_cast<std::size_t>(mx) * kout + my] = j;
    }
  }
  const int col_plus0 = lp.num_columns();
  for (int i = 0; i < np; ++i) {
    for (int y = 0; y < kout; ++y) lp.add_column(0.0, {{i * kout + y, row_t0 + i}, {-1.0, 1.0}});
  }
  const int col_minus0 = lp.num_columns();
  for (int i = 0; i < np; ++i) {
    for (int y = 0; y < kout; ++y) lp.add_column(0.0, {{i * kout + y, row_t0 + i}, {1.0, 1.0}});
  }
  lp::Column tcol;
  for (int i = 0; i < np; ++i) {
    tcol.rows.push_back(row_t0 + i);
    tcol.values.push_back(-1.0);
  }
  const int col_t = lp.add_column(1.0, std::move(tcol));
  const int col_s0 = lp.num_columns();
  for (int i = 0; i < np; ++i) lp.add_column(0.0, {{row_t0 + i}, {1.0}});

  // Deterministic invariant starting kernel and the basis it induces.
  std::vector<int> choice(kin);
  if (options.start_map) {
    choice = *options.start_map;
    for (int y : choice) {
      if (y < 0 || y >= kout) throw ConfigError("deficiency: start map entry out of range");
    }
  } else {
    const Eigen::MatrixXd affinity = source.probs.transpose() * target.probs;  // kin x kout
    for (int x = 0; x < kin; ++x) affinity.row(x).maxCoeff(&choice[x]);
  }
  Eigen::MatrixXd start = Eigen::MatrixXd::Zero(kout, kin);
  std::vector<int> basis(lp.num_rows);
  for (int x = 0; x < kin; ++x) {
    if (gin(x) < x) continue;
    const int y = choice[x];
    if (gin(x) == x) {
      start(y, x) += 0.5;
      start(gout(y), x) += 0.5;
    } else {
      start(y, x) = 1.0;
      start(gout(y), gin(x)) = 1.0;
    }
    basis[row_x0 + x_row[x]] = var_of[static_cast<std::size_t>(x) * kout + y];
  }
  int worst_i = 0;
  double worst = -1.0;
  for (int i = 0; i < np; ++i) {
    const Eigen::VectorXd pushed = start * source.probs.row(theta_reps[i]).transpose();
    double loss = 0.0;
    for (int y = 0; y < kout; ++y) {
      const double resid = target.probs(theta_reps[i], y) - pushed[y];
      basis[i * kout + y] = resid >= 0.0 ? col_minus0 + i * kout + y : col_plus0 + i * kout + y;
      loss += std::fabs(resid);
    }
    if (loss > worst) {
      worst = loss;
      worst_i = i;
    }
  }
  for (int i = 0; i < np; ++i) basis[row_t0 + i] = i == worst_i ? col_t : col_s0 + i;

  lp::SimplexOptions sopt = options.simplex;
  sopt.initial_basis = std::move(basis);
  const lp::SimplexResult sol = lp::solve(lp, sopt);

  DeficiencyResult out;
  out.lp_status = sol.status;
  out.iterations = sol.iterations;
  out.used_symmetry = reflect;
  out.value = std::clamp(sol.objective, 0.0, 2.0);
  out.dual_bound = sol.dual_objective;
  out.kernel.matrix.resize(kout, kin);
  for (int x = 0; x < kin; ++x) {
    double total = 0.0;
    for (int y = 0; y < kout; ++y) {
      const double v = std::max(0.0, sol.x[var_of[static_cast<std::size_t>(x) * kout + y]]);
      out.kernel.matrix(y, x) = v;
      total += v;
    }
    if (total > 0.0) {
      out.kernel.matrix.col(x) /= total;
    } else {
      out.kernel.matrix.col(x) = start.col(x);
    }
  }
  out.kernel_value = kernel_loss(out.kernel, source, target);
  return out;
}

void write_experiment(std::ostream& out, const FiniteExperiment& e) {
  char buf[32];
  out << e.num_params() << ' ' << e.num_outcomes() << '\n';
  for (int t = 0; t < e.num_params(); ++t) {
    for (int k = 0; k < e.num_outcomes(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", e.probs(t, k));
      out << (k ? " " : "") << buf;
    }
    out << '\n';
  }
}

FiniteExperiment read_experiment(std::istream& in) {
  long p = 0, k = 0;
  if (!(in >> p >> k) || p <= 0 || k <= 0) throw ConfigError("read_experiment: bad header");
  Eigen::MatrixXd probs(p, k);
  for (long t = 0; t < p; ++t) {
    for (long j = 0; j < k; ++j) {
      if (!(in >> probs(t, j))) throw ConfigError("read_experiment: truncated matrix");
    }
  }
  return FiniteExperiment::make({}, std::move(probs));
}

namespace {

// Cell masses of N(0, sd^2) on the centred cells of a circle of K cells,
// indexed by offset |o| in 0..(K-1)/2.
std::vector<double> wrapped_masses(double sd, int cells, double half_width) {
  const int half = (cells - 1) / 2;
  const double width = 2.0 * half_width / cells;
  const double period = 2.0 * half_width;
  const int windings = static_cast<int>(std::ceil(14.0 * sd / period)) + 1;
  std::vector<double> mass(half + 1, 0.0);
  for (int o = 0; o <= half; ++o) {
    double acc = 0.0;
    for (int w = -windings; w <= windings; ++w) {
      const double c = o * width + w * period;
      acc += interval_mass((c - 0.5 * width) / sd, (c + 0.5 * width) / sd);
    }
    mass[o] = acc;
  }
  double total = mass[0];
  for (int o = 1; o <= half; ++o) total += 2.0 * mass[o];
  for (double& v : mass) v /= total;
  return mass;
}

void check_cyclic_args(double r, int cells, double half_width) {
  if (!(r >= 1.0) || !std::isfinite(r)) throw DomainError("cyclic: r must be >= 1");
  if (cells < 3 || cells % 2 == 0) throw ConfigError("cyclic: cells per axis must be odd and >= 3");
  if (!(half_width > 0.0)) throw ConfigError("cyclic: half width must be positive");
}

}  // namespace

GaussianPair cyclic_amp1_pair(double r, int cells, double half_width) {
  check_cyclic_args(r, cells, half_width);
  const int half = (cells - 1) / 2;
  const auto src = wrapped_masses(std::sqrt(r), cells, half_width);
  const auto tgt = wrapped_masses(1.0, cells, half_width);
  Eigen::MatrixXd ps(cells, cells), qs(cells, cells);
  for (int s = 0; s < cells; ++s) {
    for (int x = 0; x < cells; ++x) {
      int o = ((x - s) % cells + cells) % cells;
      if (o > half) o -= cells;
      ps(s, x) = src[std::abs(o)];
      qs(s, x) = tgt[std::abs(o)];
    }
  }
  const double width = 2.0 * half_width / cells;
  std::vector<double> centres(cells);
  for (int i = 0; i < cells; ++i) centres[i] = (i - half) * width;
  std::vector<int> identity(cells);
  for (int i = 0; i < cells; ++i) identity[i] = i;
  return {FiniteExperiment::make({}, ps), FiniteExperiment::make({}, qs), std::move(centres), std::move(identity)};
}

CyclicDeficiencyResult cyclic_amp1_deficiency(double r, int m, int cells, double half_width,
                                              const lp::SimplexOptions& options) {
  check_cyclic_args(r, cells, half_width);
  if (m < 1 || m > 4) throw ConfigError("cyclic: dimension must be in 1..4");
  const int half = (cells - 1) / 2;
  const int base = half + 1;
  std::size_t points = 1, codes = 1;
  for (int d = 0; d < m; ++d) {
    points *= static_cast<std::size_t>(cells);
    codes *= static_cast<std::size_t>(base);
  }
  if (points > 5'000'000) throw ConfigError("cyclic: torus too large");

  const auto src1 = wrapped_masses(std::sqrt(r), cells, half_width);
  const auto tgt1 = wrapped_masses(1.0, cells, half_width);

  // Orbits under sign flips and coordinate permutations: nondecreasing tuples
  // of absolute offsets.
  std::vector<int> orbit_of_code(codes, -1);
  std::vector<std::vector<int>> reps;
  std::vector<double> orbit_size;
  {
    std::vector<int> tuple(m, 0);
    for (;;) {
      std::size_t code = 0;
      for (int d = m - 1; d >= 0; --d) code = code * base + tuple[d];
      orbit_of_code[code] = static_cast<int>(reps.size());
      reps.push_back(tuple);
      double size = 1.0;
      for (int d = 1; d <= m; ++d) size *= d;
      int run = 1;
      for (int d = 1; d <= m; ++d) {
        if (d < m && tuple[d] == tuple[d - 1]) {
          ++run;
        } else {
          for (int k = 2; k <= run; ++k) size /= k;
          run = 1;
        }
      }
      for (int v : tuple) size *= v ? 2.0 : 1.0;
      orbit_size.push_back(size);
      int d = m - 1;
      while (d >= 0 && tuple[d] == half) --d;
      if (d < 0) break;
      ++tuple[d];
      for (int e = d + 1; e < m; ++e) tuple[e] = tuple[d];
    }
  }
  const int orbits = static_cast<int>(reps.size());

  // Signed offsets of every torus point, and its orbit.
  std::vector<int> offsets(points * m);
  std::vector<int> point_orbit(points);
  {
    std::vector<int> sorted(m);
    for (std::size_t i = 0; i < points; ++i) {
      std::size_t rest = i;
      for (int d = 0; d < m; ++d) {
        const int digit = static_cast<int>(rest % cells);
        rest /= cells;
        offsets[i * m + d] = digit - half;
        sorted[d] = std::abs(digit - half);
      }
      std::sort(sorted.begin(), sorted.end());
      std::size_t code = 0;
      for (int d = m - 1; d >= 0; --d) code = code * base + sorted[d];
      point_orbit[i] = orbit_of_code[code];
    }
  }
  const auto wrap = [&](int o) {
    o %= cells;
    if (o > half) o -= cells;
    if (o < -half) o += cells;
    return std::abs(o);
  };
  const auto product = [&](const std::vector<double>& one, const std::vector<int>& tuple) {
    double v = 1.0;
    for (int a : tuple) v *= one[a];
    return v;
  };

  // a(u, o) = sum over z in orbit o of P_0(y_u - z).
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(orbits, orbits);
  std::vector<double> q0(orbits), p0(orbits);
  for (int u = 0; u < orbits; ++u) {
    const auto& y = reps[u];
    p0[u] = product(src1, y);
    q0[u] = product(tgt1, y);
    for (std::size_t i = 0; i < points; ++i) {
      double v = 1.0;
      for (int d = 0; d < m; ++d) v *= src1[wrap(y[d] - offsets[i * m + d])];
      a(u, point_orbit[i]) += v;
    }
  }

  lp::StandardFormLp lp;
  lp.num_rows = orbits + 1;
  lp.rhs.assign(q0.begin(), q0.end());
  lp.rhs.push_back(1.0);
  for (int o = 0; o < orbits; ++o) {
    lp::Column c;
    for (int u = 0; u < orbits; ++u) {
      if (a(u, o) == 0.0) continue;
      c.rows.push_back(u);
      c.values.push_back(a(u, o));
    }
    c.rows.push_back(orbits);
    c.values.push_back(orbit_size[o]);
    lp.add_column(0.0, std::move(c));
  }
  const int col_plus0 = lp.num_columns();
  for (int u = 0; u < orbits; ++u) lp.add_column(orbit_size[u], {{u}, {-1.0}});
  const int col_minus0 = lp.num_columns();
  for (int u = 0; u < orbits; ++u) lp.add_column(orbit_size[u], {{u}, {1.0}});

  CyclicDeficiencyResult out;
  out.orbits = static_cast<std::size_t>(orbits);
  std::vector<int> basis(lp.num_rows);
  for (int u = 0; u < orbits; ++u) {
    const double resid = q0[u] - p0[u];
    basis[u] = resid >= 0.0 ? col_minus0 + u : col_plus0 + u;
    out.identity_value += orbit_size[u] * std::fabs(resid);
  }
  basis[orbits] = 0;  // the identity kernel: all weight on the origin orbit

  lp::SimplexOptions sopt = options;
  sopt.initial_basis = std::move(basis);
  const lp::SimplexResult sol = lp::solve(lp, sopt);
  out.lp_status = sol.status;
  out.iterations = sol.iterations;
  out.value = std::clamp(sol.objective, 0.0, 2.0);
  out.dual_bound = sol.dual_objective;
  out.kernel.assign(sol.x.begin(), sol.x.begin() + orbits);
  return out;
}

}  // namespace clonekit
