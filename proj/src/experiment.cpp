#include "clonekit/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "clonekit/amplifier.hpp"
#include "clonekit/cloner.hpp"
#include "clonekit/deficiency.hpp"
#include "clonekit/error.hpp"
#include "clonekit/families.hpp"
#include "clonekit/gaussian.hpp"
#include "clonekit/lan.hpp"
#include "clonekit/parallel.hpp"
#include "clonekit/rng.hpp"

#ifndef CLONEKIT_VERSION
#define CLONEKIT_VERSION "unknown"
#endif

namespace clonekit {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  if (!t.empty() && t.front() == '+') ++first;
  const auto res = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError("parameter '" + key + "': '" + t + "' is not a number");
  }
  return v;
}

std::int64_t parse_integer(const std::string& key, std::string_view text) {
  const double v = parse_real(key, text);
  if (v != std::floor(v) || std::fabs(v) > 9.0e15) {
    throw ConfigError("parameter '" + key + "': '" + trim(text) + "' is not an integer");
  }
  return static_cast<std::int64_t>(v);
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Typed access to experiment parameters that records the resolved value of
// every key it is asked for, and rejects keys nobody asked for.
class Params {
 public:
  explicit Params(const std::map<std::string, std::string>& raw) : raw_(raw) {}

  std::string text(const std::string& key, const std::string& fallback) {
    const std::string v = lookup(key).value_or(fallback);
    resolved_[key] = v;
    return v;
  }

  double real(const std::string& key, double fallback) {
    const auto v = lookup(key);
    const double out = v ? parse_real(key, *v) : fallback;
    resolved_[key] = shortest(out);
    return out;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const auto v = lookup(key);
    const std::int64_t out = v ? parse_integer(key, *v) : fallback;
    resolved_[key] = std::to_string(out);
    return out;
  }

  std::size_t count(const std::string& key, std::int64_t fallback) {
    const std::int64_t v = integer(key, fallback);
    if (v < 1) throw ConfigError("parameter '" + key + "' must be at least 1");
    return static_cast<std::size_t>(v);
  }

  std::optional<double> optional_real(const std::string& key) {
    const auto v = lookup(key);
    if (!v || trim(*v).empty() || trim(*v) == "none") {
      resolved_[key] = "none";
      return std::nullopt;
    }
    const double out = parse_real(key, *v);
    resolved_[key] = shortest(out);
    return out;
  }

  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) {
    std::vector<double> out = fallback;
    if (const auto v = lookup(key)) {
      out.clear();
      for (const auto& item : split_list(*v)) out.push_back(parse_real(key, item));
    }
    std::string echo;
    for (std::size_t i = 0; i < out.size(); ++i) echo += (i ? "," : "") + shortest(out[i]);
    resolved_[key] = echo;
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, const std::vector<std::size_t>& fallback) {
    std::vector<std::size_t> out = fallback;
    if (const auto v = lookup(key)) {
      out.clear();
      for (const auto& item : split_list(*v)) {
        const std::int64_t n = parse_integer(key, item);
        if (n < 1) throw ConfigError("parameter '" + key + "': entries must be at least 1");
        out.push_back(static_cast<std::size_t>(n));
      }
    }
    std::string echo;
    for (std::size_t i = 0; i < out.size(); ++i) echo += (i ? "," : "") + std::to_string(out[i]);
    resolved_[key] = echo;
    return out;
  }

  /// Throws ConfigError naming any parameter that was never read.
  void finish(const std::string& experiment) const {
    for (const auto& [k, v] : raw_) {
      if (!resolved_.count(k)) throw ConfigError("unknown parameter '" + k + "' for experiment " + experiment);
    }
  }

  const std::map<std::string, std::string>& resolved() const { return resolved_; }

 private:
  std::optional<std::string> lookup(const std::string& key) const {
    const auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<std::string, std::string>& raw_;
  std::map<std::string, std::string> resolved_;
};

FamilyKind family_param(Params& p, const std::string& fallback) {
  const std::string id = p.text("family", fallback);
  try {
    return family_from_id(id);
  } catch (const std::exception&) {
    throw ConfigError("unknown family '" + id + "' (expected bernoulli, poisson or gauss-loc)");
  }
}

CountEstimator estimator_param(Params& p) {
  const std::string e = p.text("estimator", "rounding");
  if (e == "rounding") return CountEstimator::rounding;
  if (e == "plug-in" || e == "plug_in") return CountEstimator::plug_in;
  throw ConfigError("unknown estimator '" + e + "' (expected rounding or plug-in)");
}

Column col(std::string name, std::string description, bool distance = false) {
  return {std::move(name), std::move(description), distance};
}

using Runner = std::function<void(Params&, const ExperimentConfig&, Report&)>;

void run_tv(Params& p, const ExperimentConfig& cfg, Report& rep) {
  const double r = p.real("r", 2.0);
  const auto m = static_cast<int>(p.count("m", 1));
  std::string method = p.text("method", "closed-form");
  const std::size_t budget = p.count("budget", 1'000'000);
  std::replace(method.begin(), method.end(), '-', '_');

  std::vector<TvMethod> methods;
  if (method == "all") {
    methods.push_back(TvMethod::closed_form);
    if (m <= 2) methods.push_back(TvMethod::quadrature);
    methods.push_back(TvMethod::monte_carlo);
    methods.push_back(TvMethod::ball_indicator);
  } else {
    try {
      methods.push_back(tv_method_from_string(method));
    } catch (const std::exception&) {
      throw ConfigError("unknown tv method '" + method + "'");
    }
  }
  if (!(r >= 1.0)) throw ConfigError("tv: r must be >= 1");

  rep.columns = {col("r", "amplification factor"), col("m", "dimension"), col("method", "evaluation route"),
                 col("value", "||N(0,1) - N(0,r 1)||_1", true),
                 col("std_error", "Monte Carlo standard error (0 for deterministic routes)", true)};
  const auto p0 = GaussianShift::standard(m);
  const auto q0 = GaussianShift::isotropic(Eigen::VectorXd::Zero(m), r);
  for (std::size_t k = 0; k < methods.size(); ++k) {
    Rng rng = Rng::stream(cfg.seed, hash_name("tv"), k);
    TvResult res;
    switch (methods[k]) {
      case TvMethod::closed_form: res = tv_isotropic(r, m); break;
      case TvMethod::ball_indicator: res = tv_ball_indicator(r, m, budget, rng); break;
      default: res = tv_numeric(p0, q0, methods[k], budget, rng); break;
    }
    rep.rows.push_back({r, std::int64_t{m}, std::string(to_string(res.method)), res.value, res.std_error});
  }
}

void run_amp_loss(Params& p, const ExperimentConfig& cfg, Report& rep) {
  const double r = p.real("r", 2.0);
  const auto m = static_cast<int>(p.count("m", 1));
  const std::vector<double> var = p.reals("variance", {1.0});
  const std::vector<double> hs = p.reals("h", {0.0, 1.0, 3.0});
  const std::size_t budget = p.count("budget", 1'000'000);
  std::string method = p.text("method", "monte-carlo");
  std::replace(method.begin(), method.end(), '-', '_');
  TvMethod tm;
  try {
    tm = tv_method_from_string(method);
  } catch (const std::exception&) {
    throw ConfigError("unknown amp-loss method '" + method + "'");
  }
  if (tm != TvMethod::monte_carlo && tm != TvMethod::quadrature) {
    throw ConfigError("amp-loss method must be monte-carlo or quadrature");
  }

  Eigen::MatrixXd sigma;
  if (var.size() == 1) {
    sigma = var[0] * Eigen::MatrixXd::Identity(m, m);
  } else if (static_cast<int>(var.size()) == m * m) {
    sigma = Eigen::Map<const Eigen::MatrixXd>(var.data(), m, m).transpose();
  } else {
    throw ConfigError("amp-loss: variance needs 1 or m*m entries");
  }
  std::vector<Eigen::VectorXd> grid;
  for (double h : hs) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    v[0] = h;
    grid.push_back(v);
  }
  Rng rng = Rng::stream(cfg.seed, hash_name("amp-loss"), 0);
  const AmplifierLossReport res = amplifier_loss_mc(r, sigma, grid, budget, rng, tm);
  const double reference = tv_isotropic(r, m).value;

  rep.columns = {col("h", "shift along the first axis"), col("method", "evaluation route"),
                 col("value", "||Psi(N(h,S)) - N(sqrt(r) h,S)||_1", true),
                 col("std_error", "Monte Carlo standard error", true),
                 col("reference", "closed-form loss for the isotropic case", true)};
  for (std::size_t i = 0; i < hs.size(); ++i) {
    rep.rows.push_back({hs[i], std::string(to_string(res.per_h[i].method)), res.per_h[i].value,
                        res.per_h[i].std_error, reference});
  }
}

void run_deficiency(Params& p, const ExperimentConfig& cfg, Report& rep) {
  const std::string mode = p.text("mode", "amplification");
  const double r = p.real("r", 2.0);
  lp::SimplexOptions sopt;
  sopt.max_iterations = p.count("max_iterations", 1'000'000);
  const int workers = cfg.workers;

  if (mode == "amp1-torus") {
    const auto m = static_cast<int>(p.count("m", 1));
    const auto cells = static_cast<int>(p.count("cells", 201));
    const double half_width = p.real("half_width", 10.0);
    const CyclicDeficiencyResult res = cyclic_amp1_deficiency(r, m, cells, half_width, sopt);
    rep.columns = {col("r", "amplification factor"), col("m", "dimension"), col("cells", "cells per axis"),
                   col("half_width", "torus half width"), col("value", "LP deficiency", true),
                   col("identity_value", "objective of the identity kernel", true),
                   col("dual_bound", "dual objective at the final basis", true),
                   col("reference", "closed-form loss", true), col("orbits", "symmetry orbits (LP rows - 1)"),
                   col("iterations", "simplex iterations"), col("status", "LP status")};
    rep.rows.push_back({r, std::int64_t{m}, std::int64_t{cells}, half_width, res.value, res.identity_value,
                        res.dual_bound, tv_isotropic(r, m).value, static_cast<std::int64_t>(res.orbits),
                        static_cast<std::int64_t>(res.iterations), std::string(lp::to_string(res.lp_status))});
    if (res.lp_status != lp::LpStatus::optimal) {
      rep.partial = true;
      rep.status = "LP stopped with status " + std::string(lp::to_string(res.lp_status));
    }
    return;
  }

  PairMode pm;
  if (mode == "amplification") {
    pm = PairMode::amplification;
  } else if (mode == "amp1") {
    pm = PairMode::amp1;
  } else if (mode == "literal") {
    pm = PairMode::literal;
  } else {
    throw ConfigError("unknown deficiency mode '" + mode + "' (expected amplification, amp1, literal, amp1-torus)");
  }
  const std::vector<double> as = p.reals("a", {1.0});
  const double step = p.real("h_step", 0.5);
  const double variance = p.real("variance", 1.0);
  Lattice grid;
  grid.lo = p.real("lo", -10.0);
  grid.hi = p.real("hi", 10.0);
  grid.count = static_cast<int>(p.count("count", 201));
  if (!(step > 0.0)) throw ConfigError("deficiency: h_step must be positive");

  std::vector<GaussianPair> pairs;
  std::vector<std::size_t> shifts;
  for (double a : as) {
    if (!(a >= 0.0)) throw ConfigError("deficiency: a must be nonnegative");
    const auto k = static_cast<long>(std::floor(a / step + 1e-9));
    std::vector<double> h;
    for (long i = -k; i <= k; ++i) h.push_back(static_cast<double>(i) * step);
    shifts.push_back(h.size());
    pairs.push_back(discretize_gaussian_pair(h, variance, r, grid, pm));
  }
  std::vector<DeficiencyResult> results(as.size());
  parallel_for(as.size(), workers, [&](std::size_t i) {
    DeficiencyOptions o;
    o.simplex = sopt;
    o.start_map = pairs[i].natural_map;
    results[i] = lp_deficiency(pairs[i].source, pairs[i].target, o);
  });

  const double reference = tv_isotropic(r, 1).value;
  rep.columns = {col("a", "bound on |h|"), col("shifts", "number of h values"), col("value", "LP deficiency", true),
                 col("kernel_value", "worst-case loss of the recovered kernel", true),
                 col("dual_bound", "dual objective at the final basis", true),
                 col("reference", "closed-form loss over all h", true), col("iterations", "simplex iterations"),
                 col("status", "LP status")};
  for (std::size_t i = 0; i < as.size(); ++i) {
    const auto& res = results[i];
    rep.rows.push_back({as[i], static_cast<std::int64_t>(shifts[i]), res.value, res.kernel_value, res.dual_bound,
                        reference, static_cast<std::int64_t>(res.iterations),
                        std::string(lp::to_string(res.lp_status))});
    if (res.lp_status != lp::LpStatus::optimal) {
      rep.partial = true;
      rep.status = "LP for a = " + shortest(as[i]) + " stopped with status " +
                   std::string(lp::to_string(res.lp_status));
    }
  }
}

struct ClonerParams {
  FamilyKind kind;
  double theta;
  double sigma;
  ClonerConfig cfg;
  CloneLossOptions options;
};

ClonerParams cloner_params(Params& p, const ExperimentConfig& run, std::size_t default_reps) {
  ClonerParams out;
  out.kind = family_param(p, "bernoulli");
  out.theta = p.real("theta", out.kind == FamilyKind::poisson ? 2.0 : 0.3);
  out.sigma = p.real("sigma", 1.0);
  if (!is_discrete(out.kind)) throw ConfigError("the cloner loss needs a discrete family (bernoulli or poisson)");
  out.cfg.r = p.real("r", 2.0);
  out.cfg.delta = p.real("delta", 0.05);
  out.cfg.epsilon = p.real("epsilon", 0.01);
  out.cfg.frozen_theta_hat = p.optional_real("frozen_theta");
  out.cfg.seed = run.seed;
  out.options.reps = p.count("reps", static_cast<std::int64_t>(default_reps));
  out.options.bootstrap = p.count("bootstrap", 200);
  out.options.estimator = estimator_param(p);
  out.options.workers = run.workers;
  return out;
}

double cloner_reference(const ClonerConfig& cfg) {
  const double gain_sq = cfg.frozen_theta_hat ? cfg.r : cfg.r / (1.0 - cfg.delta);
  return tv_isotropic(gain_sq, 1).value;
}

void run_clone_sim(Params& p, const ExperimentConfig& cfg, Report& rep) {
  ClonerParams cp = cloner_params(p, cfg, 1000);
  const std::vector<std::size_t> ns = p.counts("n", {100});
  const FamilyPoint truth(cp.kind, cp.theta, cp.sigma);

  rep.columns = {col("n", "input sample size"), col("output_size", "number of clones emitted"),
                 col("loss", "L1 between output and target count laws", true),
                 col("ci_lo", "95% bootstrap lower bound", true), col("ci_hi", "95% bootstrap upper bound", true),
                 col("reference", "closed-form Gaussian loss at the effective gain", true),
                 col("reps", "replicates"), col("clip_rate", "fraction of targets clipped to the range")};
  for (std::size_t n : ns) {
    ClonerConfig c = cp.cfg;
    c.n = n;
    c.validate();
    CloneLossOptions o = cp.options;
    o.stream_id = hash_name("clone-sim:" + std::to_string(n));
    const CloneLossResult res = clone_loss_discrete(truth, c, o);
    rep.rows.push_back({static_cast<std::int64_t>(n), static_cast<std::int64_t>(c.output_size()), res.loss,
                        res.ci_lo, res.ci_hi, cloner_reference(c), static_cast<std::int64_t>(res.reps),
                        res.clip_rate});
  }
}

void run_minimax_probe(Params& p, const ExperimentConfig& cfg, Report& rep) {
  ClonerParams cp = cloner_params(p, cfg, 2000);
  cp.cfg.n = p.count("n", 1600);
  const std::vector<double> hs = p.reals("h", {-2.0, -1.0, 0.0, 1.0, 2.0});
  cp.cfg.validate();
  cp.options.stream_id = hash_name("minimax-probe");
  const FamilyPoint centre(cp.kind, cp.theta, cp.sigma);
  const MinimaxProbeResult res = local_minimax_probe(centre, hs, cp.cfg, cp.options);

  rep.columns = {col("kind", "point or supremum"), col("h", "local shift"),
                 col("theta", "theta + h / sqrt(n)"), col("loss", "cloner L1 loss", true),
                 col("ci_lo", "95% bootstrap lower bound", true), col("ci_hi", "95% bootstrap upper bound", true),
                 col("reference", "closed-form Gaussian loss at the effective gain", true)};
  const double reference = cloner_reference(cp.cfg);
  for (std::size_t j = 0; j < hs.size(); ++j) {
    const auto& r = res.per_h[j];
    rep.rows.push_back({std::string("point"), hs[j], r.theta, r.loss, r.ci_lo, r.ci_hi, reference});
  }
  const auto& best = res.per_h[res.argmax];
  rep.rows.push_back({std::string("supremum"), hs[res.argmax], best.theta, res.supremum, best.ci_lo, best.ci_hi,
                      reference});
}

void run_lan_diag(Params& p, const ExperimentConfig& cfg, Report& rep) {
  const FamilyKind kind = family_param(p, "bernoulli");
  const double theta = p.real("theta", kind == FamilyKind::poisson ? 2.0 : kind == FamilyKind::bernoulli ? 0.5 : 0.0);
  const double sigma = p.real("sigma", 1.0);
  const double h = p.real("h", 1.0);
  const std::vector<std::size_t> ns = p.counts("n", {25, 100, 400});
  const double threshold = p.real("threshold", 0.1);
  const std::size_t reps = p.count("reps", 10000);
  const std::vector<double> dqm_h = p.reals("dqm_h", {0.4, 0.2, 0.1, 0.05});
  const FamilyPoint f(kind, theta, sigma);

  const LanResidualReport lan = lan_residual_rate(f, h, ns, threshold, reps, cfg.seed, hash_name("lan-diag"),
                                                  cfg.workers);
  rep.columns = {col("metric", "exceedance: P(|log LR - quadratic| > threshold); dqm_ratio: DQM residual / h^2"),
                 col("n", "sample size (0 for per-observation metrics)"), col("h", "local shift"),
                 col("value", "metric value"), col("lo", "95% Wilson lower bound (exceedance only)"),
                 col("hi", "95% Wilson upper bound (exceedance only)")};
  for (const auto& e : lan.per_n) {
    rep.rows.push_back({std::string("exceedance"), static_cast<std::int64_t>(e.n), h, e.probability, e.wilson_lo,
                        e.wilson_hi});
  }
  if (!dqm_h.empty()) {
    for (const auto& d : dqm_residual(f, dqm_h)) {
      rep.rows.push_back({std::string("dqm_ratio"), std::int64_t{0}, d.h, d.ratio, d.ratio, d.ratio});
    }
  }
}

void run_coupling(Params& p, const ExperimentConfig&, Report& rep) {
  const FamilyKind kind = family_param(p, "bernoulli");
  const double theta = p.real("theta", kind == FamilyKind::poisson ? 2.0 : kind == FamilyKind::bernoulli ? 0.5 : 0.0);
  const double sigma = p.real("sigma", 1.0);
  const std::vector<std::size_t> ns = p.counts("n", {16, 64, 256, 1024});
  const double eps_dev = p.real("eps_dev", 0.1);
  const std::size_t resolution = p.count("resolution", 100000);
  const FamilyPoint f(kind, theta, sigma);
  const CouplingReport res = quantile_coupling(f, ns, eps_dev, resolution);

  rep.columns = {col("n", "sample size"),
                 col("deviation_probability", "measure of {|eta_n - eta| >= eps_dev} under the coupling"),
                 col("mean_deviation", "E|eta_n - eta| under the coupling"),
                 col("sup_deviation", "largest |eta_n - eta| on the probe grid"),
                 col("log_log_slope", "least-squares slope of log mean_deviation against log n")};
  for (const auto& row : res.per_n) {
    rep.rows.push_back({static_cast<std::int64_t>(row.n), row.deviation_probability, row.mean_deviation,
                        row.sup_deviation, res.log_log_slope});
  }
}

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table = {
      {"tv", run_tv},
      {"amp-loss", run_amp_loss},
      {"deficiency", run_deficiency},
      {"clone-sim", run_clone_sim},
      {"minimax-probe", run_minimax_probe},
      {"lan-diag", run_lan_diag},
      {"coupling", run_coupling},
  };
  return table;
}

bool is_run_key(const std::string& key) {
  return key == "experiment" || key == "seed" || key == "workers" || key == "out" || key == "format" ||
         key == "units";
}

void set_run_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "experiment") {
    cfg.experiment = value;
  } else if (key == "seed") {
    const double v = parse_real(key, value);
    if (v < 0 || v != std::floor(v) || v > 1.8e19) throw ConfigError("seed must be a nonnegative integer");
    cfg.seed = std::stoull(trim(value));
  } else if (key == "workers") {
    const std::int64_t w = parse_integer(key, value);
    if (w < 0) throw ConfigError("workers must be nonnegative");
    cfg.workers = static_cast<int>(w);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "format") {
    if (value != "csv" && value != "json") throw ConfigError("format must be csv or json");
    cfg.format = value;
  } else if (key == "units") {
    if (value != "l1" && value != "tv") throw ConfigError("units must be l1 or tv");
    cfg.units = value;
  }
}

std::string cell_text(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return fixed17(*d);
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return quoted + "\"";
}

}  // namespace

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : runners()) out.push_back(k);
    return out;
  }();
  return ids;
}

std::string version_string() { return CLONEKIT_VERSION; }

ExperimentConfig parse_config(std::istream& in, const std::string& source_name) {
  ExperimentConfig cfg;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const auto where = source_name + ":" + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (section != "run" && section != "params") {
        throw ConfigError(where + ": unknown section [" + section + "] (expected [run] or [params])");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    try {
      if (section != "params" && is_run_key(key)) {
        set_run_key(cfg, key, value);
      } else if (section == "run") {
        throw ConfigError("unknown run key '" + key + "'");
      } else {
        if (cfg.params.count(key)) throw ConfigError("duplicate parameter '" + key + "'");
        cfg.params[key] = value;
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  return parse_config(in, path);
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = trim(std::string_view(assignment).substr(0, eq));
  const std::string value = trim(std::string_view(assignment).substr(eq + 1));
  if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
  if (is_run_key(key)) {
    set_run_key(cfg, key, value);
  } else {
    cfg.params[key] = value;
  }
}

Report run_experiment(const ExperimentConfig& cfg) {
  const auto it = runners().find(cfg.experiment);
  if (it == runners().end()) {
    std::string known;
    for (const auto& id : experiment_ids()) known += (known.empty() ? "" : ", ") + id;
    throw ConfigError("unknown experiment '" + cfg.experiment + "' (known: " + known + ")");
  }
  const auto start = std::chrono::steady_clock::now();
  Report rep;
  rep.experiment = cfg.experiment;
  rep.version = version_string();
  Params params(cfg.params);
  try {
    it->second(params, cfg, rep);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const UnsupportedError& e) {
    throw ConfigError(e.what());
  }
  params.finish(cfg.experiment);

  rep.config = {{"experiment", cfg.experiment},
                {"seed", std::to_string(cfg.seed)},
                {"workers", std::to_string(cfg.workers)},
                {"format", cfg.format},
                {"units", cfg.units}};
  for (const auto& [k, v] : params.resolved()) rep.config.emplace_back(k, v);

  if (cfg.units == "tv") {
    for (std::size_t c = 0; c < rep.columns.size(); ++c) {
      if (!rep.columns[c].distance) continue;
      rep.columns[c].name += "_tv";
      rep.columns[c].description = "TV = L1 / 2; " + rep.columns[c].description;
      for (auto& row : rep.rows) {
        if (auto* d = std::get_if<double>(&row[c])) *d *= 0.5;
      }
    }
  }
  rep.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::string emit_csv(const Report& report) {
  if (report.rows.empty() || report.columns.empty()) throw ConfigError("refusing to emit an empty report");
  std::ostringstream out;
  out << "# clonekit " << report.experiment << " report\n";
  for (const auto& [k, v] : report.config) out << "# config " << k << " = " << v << '\n';
  for (const auto& c : report.columns) out << "# column " << c.name << ": " << c.description << '\n';
  if (report.partial) out << "# status partial: " << report.status << '\n';
  for (std::size_t c = 0; c < report.columns.size(); ++c) out << (c ? "," : "") << report.columns[c].name;
  out << '\n';
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << cell_text(row[c]);
    out << '\n';
  }
  return out.str();
}

std::string emit_json(const Report& report) {
  if (report.rows.empty() || report.columns.empty()) throw ConfigError("refusing to emit an empty report");
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema"] = 1;
  j["experiment"] = report.experiment;
  j["version"] = report.version;
  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : report.config) config[k] = v;
  j["config"] = config;
  ordered_json cols = ordered_json::array();
  for (const auto& c : report.columns) {
    cols.push_back({{"name", c.name}, {"description", c.description}, {"distance", c.distance}});
  }
  j["columns"] = cols;
  ordered_json rows = ordered_json::array();
  for (const auto& row : report.rows) {
    ordered_json r = ordered_json::array();
    for (const auto& cell : row) {
      std::visit([&](const auto& v) { r.push_back(v); }, cell);
    }
    rows.push_back(r);
  }
  j["rows"] = rows;
  j["partial"] = report.partial;
  j["status"] = report.status;
  j["wall_clock_seconds"] = report.wall_clock_seconds;
  return j.dump(2) + "\n";
}

Report parse_json_report(const std::string& text) {
  using nlohmann::ordered_json;
  Report rep;
  try {
    const ordered_json j = ordered_json::parse(text);
    if (j.at("schema").get<int>() != 1) throw ConfigError("unsupported report schema");
    rep.experiment = j.at("experiment").get<std::string>();
    rep.version = j.at("version").get<std::string>();
    for (const auto& [k, v] : j.at("config").items()) rep.config.emplace_back(k, v.get<std::string>());
    for (const auto& c : j.at("columns")) {
      rep.columns.push_back(
          {c.at("name").get<std::string>(), c.at("description").get<std::string>(), c.at("distance").get<bool>()});
    }
    for (const auto& r : j.at("rows")) {
      std::vector<Cell> row;
      for (const auto& cell : r) {
        if (cell.is_number_float()) {
          row.emplace_back(cell.get<double>());
        } else if (cell.is_number_integer()) {
          row.emplace_back(cell.get<std::int64_t>());
        } else if (cell.is_string()) {
          row.emplace_back(cell.get<std::string>());
        } else {
          throw ConfigError("report cell of unsupported type");
        }
      }
      rep.rows.push_back(std::move(row));
    }
    rep.partial = j.at("partial").get<bool>();
    rep.status = j.at("status").get<std::string>();
    rep.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
  return rep;
}

void write_report(const Report& report, const ExperimentConfig& cfg, std::ostream& fallback) {
  const std::string bytes = cfg.format == "json" ? emit_json(report) : emit_csv(report);
  if (!cfg.out || *cfg.out == "-") {
    fallback << bytes;
    return;
  }
  std::ofstream out(*cfg.out, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write report to " + *cfg.out);
  out << bytes;
  out.close();
  if (!out) throw ConfigError("failed while writing report to " + *cfg.out);
}

}  // namespace clonekit
