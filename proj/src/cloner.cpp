#include "clonekit/cloner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "clonekit/error.hpp"
#include "clonekit/lan.hpp"
#include "clonekit/parallel.hpp"

namespace clonekit {

namespace {

constexpr std::uint64_t kBootstrapSalt = hash_name("bootstrap");

// Two-atom law of the randomized rounding of t, each atom clipped into [lo, hi].
struct TwoAtom {
  std::int64_t lower = 0;
  double lower_weight = 1.0;
  std::int64_t upper = 0;
  double upper_weight = 0.0;
};

TwoAtom rounding_atoms(double t, double lo, double hi) {
  const double fl = std::floor(t);
  const double frac = t - fl;
  auto clip = [&](double v) { return static_cast<std::int64_t>(std::clamp(v, lo, hi)); };
  return {clip(fl), 1.0 - frac, clip(fl + 1.0), frac};
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const auto j = std::min(i + 1, v.size() - 1);
  return v[i] + (pos - static_cast<double>(i)) * (v[j] - v[i]);
}

}  // namespace

void ClonerConfig::validate() const {
  if (n == 0) throw ConfigError("cloner: n must be positive");
  if (!(r >= 1.0) || !std::isfinite(r)) throw ConfigError("cloner: r must be >= 1");
  const double rn = r * static_cast<double>(n);
  if (std::fabs(rn - std::round(rn)) > 1e-9 * std::max(1.0, rn)) throw ConfigError("cloner: r * n must be an integer");
  if (!(epsilon >= 0.0)) throw ConfigError("cloner: epsilon must be nonnegative");
  if (frozen_theta_hat) return;
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("cloner: delta must lie in (0, 1)");
  if (n1() < 1 || n2() < 1) throw ConfigError("cloner: split leaves no estimation or no scoring data");
}

std::size_t ClonerConfig::n1() const {
  if (frozen_theta_hat) return 0;
  // Guard against delta * n landing just above an integer through rounding.
  const double raw = delta * static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(raw - 1e-12 * std::max(1.0, raw)));
}

std::size_t ClonerConfig::n2() const { return n - std::min(n, n1()); }

std::size_t ClonerConfig::output_size() const {
  return static_cast<std::size_t>(std::llround(r * static_cast<double>(n)));
}

double ClonerConfig::gain() const {
  return std::sqrt(static_cast<double>(output_size()) / static_cast<double>(n2()));
}

Estimate estimate_theta(FamilyKind kind, std::span<const double> data) {
  if (data.empty()) throw DomainError("estimate_theta: data must be nonempty");
  const std::size_t n = data.size();
  const double mle = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(n);
  const auto [lo, hi] = clipped_domain(kind, n);
  const double clipped = std::clamp(mle, lo, hi);
  const double step = 1.0 / std::sqrt(static_cast<double>(n));

  double q = clipped / step;
  if (std::fabs(q - std::round(q)) < 1e-9) q = std::round(q);
  const double down = std::floor(q) * step;
  const double up = std::ceil(q) * step;
  const bool down_ok = down >= lo && down <= hi;
  const bool up_ok = up >= lo && up <= hi;
  double theta_hat = clipped;
  if (down_ok && up_ok) {
    theta_hat = (clipped - down <= up - clipped) ? down : up;
  } else if (down_ok) {
    theta_hat = down;
  } else if (up_ok) {
    theta_hat = up;
  }
  return {theta_hat, n};
}

CloneRunRecord clone(const FamilySpec& family, std::span<const double> data, const ClonerConfig& cfg, Rng& rng,
                     CloneEmit emit) {
  cfg.validate();
  if (data.size() != cfg.n) throw DomainError("clone: data length must equal cfg.n");
  const std::size_t n1 = cfg.n1();
  const std::size_t big_n = cfg.output_size();

  CloneRunRecord rec;
  rec.theta_hat = cfg.frozen_theta_hat ? *cfg.frozen_theta_hat : estimate_theta(family.kind, data.subspan(0, n1)).theta_hat;
  const FamilyPoint at_hat = family.at(rec.theta_hat);

  rec.smoothed_score = smoothed_score(at_hat, data.subspan(n1), cfg.epsilon, rng).value;
  rec.amplified = cfg.gain() * rec.smoothed_score;

  // J * amplified = (S - N centre) * slope / sqrt(N)  =>  S = N centre + sqrt(N) J amplified / slope.
  const ScoreAffine affine = score_affine(at_hat);
  const double nn = static_cast<double>(big_n);
  rec.target_stat = nn * affine.centre + std::sqrt(nn) * fisher_info(at_hat).fisher * rec.amplified / affine.slope;

  if (!is_discrete(family.kind)) {
    rec.realized_stat = rec.target_stat;
    if (emit == CloneEmit::data) rec.output = conditional_resample(at_hat, big_n, rec.target_stat, rng).data;
    return rec;
  }
  // Snap float noise so that an exact reconstruction of S stays exact.
  const double nearest = std::round(rec.target_stat);
  if (std::fabs(rec.target_stat - nearest) <= 1e-9 * std::max(1.0, std::fabs(nearest))) rec.target_stat = nearest;
  const auto [lo, hi] = stat_range(family.kind, big_n);
  std::int64_t t = randomized_round(rec.target_stat, rng);
  if (static_cast<double>(t) < lo || static_cast<double>(t) > hi) {
    t = static_cast<std::int64_t>(std::clamp(static_cast<double>(t), lo, hi));
    rec.clipped = true;
  }
  rec.realized_stat = static_cast<double>(t);
  if (emit == CloneEmit::data) rec.output = conditional_resample_exact(at_hat, big_n, t, rng);
  return rec;
}

CloneLossResult clone_loss_discrete(const FamilyPoint& truth, const ClonerConfig& cfg, const CloneLossOptions& options) {
  if (!is_discrete(truth.kind)) {
    throw UnsupportedError("clone_loss_discrete: " + std::string(family_id(truth.kind)) + " is not a discrete family");
  }
  if (options.reps == 0) throw DomainError("clone_loss_discrete: reps must be positive");
  cfg.validate();
  const FamilySpec spec{truth.kind, truth.sigma};
  const std::size_t big_n = cfg.output_size();
  const auto [lo, hi] = stat_range(truth.kind, big_n);

  std::vector<TwoAtom> atoms(options.reps);
  std::vector<unsigned char> clipped(options.reps, 0);
  parallel_for(options.reps, options.workers, [&](std::size_t i) {
    Rng rng = Rng::stream(cfg.seed, options.stream_id, i);
    const Sample data = sample(truth, cfg.n, rng);
    const CloneRunRecord rec = clone(spec, data, cfg, rng, CloneEmit::stat_only);
    clipped[i] = rec.clipped ? 1 : 0;
    if (options.estimator == CountEstimator::plug_in) {
      const auto k = static_cast<std::int64_t>(rec.realized_stat);
      atoms[i] = {k, 1.0, k, 0.0};
    } else {
      atoms[i] = rounding_atoms(rec.target_stat, lo, hi);
    }
  });

  const std::vector<double> target = stat_pmf(truth, big_n);
  std::int64_t top = static_cast<std::int64_t>(target.size()) - 1;
  for (const auto& a : atoms) top = std::max(top, a.upper);
  const auto width = static_cast<std::size_t>(top + 1);

  auto l1_of = [&](const std::vector<double>& counts, double total) {
    double sum = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
      const double t = k < target.size() ? target[k] : 0.0;
      sum += std::fabs(counts[k] / total - t);
    }
    return std::min(sum, 2.0);
  };
  auto accumulate_atom = [](std::vector<double>& counts, const TwoAtom& a, double w) {
    counts[static_cast<std::size_t>(a.lower)] += w * a.lower_weight;
    if (a.upper_weight > 0.0) counts[static_cast<std::size_t>(a.upper)] += w * a.upper_weight;
  };

  std::vector<double> counts(width, 0.0);
  for (const auto& a : atoms) accumulate_atom(counts, a, 1.0);
  const double reps = static_cast<double>(options.reps);

  CloneLossResult out;
  out.theta = truth.theta;
  out.reps = options.reps;
  out.loss = l1_of(counts, reps);
  out.clip_rate = static_cast<double>(std::accumulate(clipped.begin(), clipped.end(), std::size_t{0})) / reps;

  std::vector<double> boot(options.bootstrap);
  parallel_for(options.bootstrap, options.workers, [&](std::size_t b) {
    Rng rng = Rng::stream(cfg.seed, options.stream_id ^ kBootstrapSalt, b);
    std::vector<double> c(width, 0.0);
    for (std::size_t i = 0; i < options.reps; ++i) {
      const auto pick = std::min(static_cast<std::size_t>(rng.uniform() * reps), options.reps - 1);
      accumulate_atom(c, atoms[pick], 1.0);
    }
    boot[b] = l1_of(c, reps);
  });
  if (!boot.empty()) {
    out.ci_lo = percentile(boot, 0.025);
    out.ci_hi = percentile(boot, 0.975);
  } else {
    out.ci_lo = out.ci_hi = out.loss;
  }

  for (auto& c : counts) c /= reps;
  out.output_law = EmpiricalLaw::from_dense(counts);
  out.output_law.sample_count = options.reps;
  out.target_law = EmpiricalLaw::from_dense(target);
  return out;
}

EmpiricalLaw output_count_law_given_input(const FamilySpec& family, std::span<const double> data,
                                          const ClonerConfig& cfg) {
  if (!is_discrete(family.kind)) throw UnsupportedError("output_count_law_given_input: discrete families only");
  if (cfg.epsilon != 0.0) throw UnsupportedError("output_count_law_given_input: requires epsilon = 0");
  Rng unused(0);
  const CloneRunRecord rec = clone(family, data, cfg, unused, CloneEmit::stat_only);
  const auto [lo, hi] = stat_range(family.kind, cfg.output_size());
  const TwoAtom a = rounding_atoms(rec.target_stat, lo, hi);
  std::vector<double> pmf(static_cast<std::size_t>(std::max(a.lower, a.upper) + 1), 0.0);
  pmf[static_cast<std::size_t>(a.lower)] += a.lower_weight;
  pmf[static_cast<std::size_t>(a.upper)] += a.upper_weight;
  return EmpiricalLaw::from_dense(pmf);
}

MinimaxProbeResult local_minimax_probe(const FamilyPoint& centre, std::span<const double> h_grid,
                                       const ClonerConfig& cfg, const CloneLossOptions& options) {
  if (h_grid.empty()) throw DomainError("local_minimax_probe: h grid must be nonempty");
  MinimaxProbeResult out;
  const double root_n = std::sqrt(static_cast<double>(cfg.n));
  for (std::size_t j = 0; j < h_grid.size(); ++j) {
    const double theta = centre.theta + h_grid[j] / root_n;
    if (!in_domain(centre.kind, theta)) throw DomainError("local_minimax_probe: theta + h/sqrt(n) outside the domain");
    CloneLossOptions opt = options;
    opt.stream_id = options.stream_id + j + 1;
    out.h_grid.push_back(h_grid[j]);
    out.per_h.push_back(clone_loss_discrete(centre.with_theta(theta), cfg, opt));
    if (j == 0 || out.per_h.back().loss > out.supremum) {
      out.supremum = out.per_h.back().loss;
      out.argmax = j;
    }
  }
  return out;
}

}  // namespace clonekit
