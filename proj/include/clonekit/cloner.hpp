#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "clonekit/families.hpp"
#include "clonekit/rng.hpp"
#include "clonekit/tv.hpp"

namespace clonekit {

/// Parameters of the (n, rn) cloner. The first n1 = ceil(delta n) observations
/// estimate theta; the remaining n2 = n - n1 feed the smoothed score.
struct ClonerConfig {
  std::size_t n = 0;
  double r = 1.0;
  double delta = 0.05;
  double epsilon = 0.01;
  std::uint64_t seed = 0;
  /// Test hook: use this estimate instead of estimating. All n observations
  /// then feed the score (n1 = 0).
  std::optional<double> frozen_theta_hat;

  /// Throws ConfigError on n = 0, r < 1, non-integral r n, delta outside (0,1),
  /// negative epsilon, or a split leaving n1 or n2 empty.
  void validate() const;

  std::size_t n1() const;
  std::size_t n2() const;
  std::size_t output_size() const;
  /// Amplifier gain sqrt(rn / n2); equals sqrt(r / (1 - delta)) when delta n is integral.
  double gain() const;
};

struct Estimate {
  double theta_hat = 0.0;
  std::size_t n_used = 0;
};

/// Sample-mean MLE, clipped into the working compact for n_used observations,
/// then moved to the nearest point of n_used^{-1/2} Z inside that compact
/// (exact ties go to the lower point). If the compact holds no grid point the
/// clipped MLE is returned.
Estimate estimate_theta(FamilyKind kind, std::span<const double> data);

struct CloneRunRecord {
  double theta_hat = 0.0;
  double smoothed_score = 0.0;  ///< L = J^{-1} l^{n2} + Y_eps
  double amplified = 0.0;       ///< gain * L
  double target_stat = 0.0;     ///< T*, before rounding and clipping
  double realized_stat = 0.0;   ///< statistic of the emitted sample
  bool clipped = false;
  Sample output;                ///< empty when emitted stat-only
};

enum class CloneEmit { data, stat_only };

/// One run of the cloner on `data` (length cfg.n).
///   1. theta_hat from the first n1 observations
///   2. L from the remaining n2 at theta_hat
///   3. amplified = gain * L
///   4. T* solves J * amplified = l^{rn}(S) at theta_hat
///   5. omega^{rn} drawn from the conditional law given S = T*
CloneRunRecord clone(const FamilySpec& family, std::span<const double> data, const ClonerConfig& cfg, Rng& rng,
                     CloneEmit emit = CloneEmit::data);

/// How each replicate contributes to the output count law.
enum class CountEstimator {
  plug_in,   ///< point mass at the realized count
  rounding,  ///< two-atom law of the randomized rounding of T* (Rao-Blackwellized)
};

struct CloneLossOptions {
  std::size_t reps = 1000;
  std::uint64_t stream_id = 0;
  int workers = 1;
  std::size_t bootstrap = 200;
  CountEstimator estimator = CountEstimator::rounding;
};

struct CloneLossResult {
  double theta = 0.0;
  double loss = 0.0;  ///< L1 between output and target count laws
  double ci_lo = 0.0;  ///< 95% percentile bootstrap over replicates
  double ci_hi = 0.0;
  std::size_t reps = 0;
  double clip_rate = 0.0;
  EmpiricalLaw output_law;
  EmpiricalLaw target_law;
};

/// ||Lambda(P_theta^n) - P_theta^{rn}||_1 for a discrete family. Output and
/// target share the conditional law given the count, so the sequence-level L1
/// equals the L1 between count laws, which is what is computed. Replicate i
/// uses Rng::stream(cfg.seed, options.stream_id, i).
CloneLossResult clone_loss_discrete(const FamilyPoint& truth, const ClonerConfig& cfg, const CloneLossOptions& options);

/// Exact law of the output count given one input sequence with epsilon = 0 and
/// the two-atom rounding; used for brute-force checks on tiny n.
EmpiricalLaw output_count_law_given_input(const FamilySpec& family, std::span<const double> data,
                                          const ClonerConfig& cfg);

struct MinimaxProbeResult {
  std::vector<double> h_grid;
  std::vector<CloneLossResult> per_h;
  double supremum = 0.0;
  std::size_t argmax = 0;
};

/// Runs clone_loss_discrete at theta + h / sqrt(n) for each h and reports the
/// largest loss. Grid point j uses stream id options.stream_id + j + 1.
MinimaxProbeResult local_minimax_probe(const FamilyPoint& centre, std::span<const double> h_grid,
                                       const ClonerConfig& cfg, const CloneLossOptions& options);

}  // namespace clonekit
