#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace clonekit {

/// A pmf on integer lattice points. `support` is strictly increasing and
/// `mass` is parallel to it.
struct EmpiricalLaw {
  std::vector<std::int64_t> support;
  std::vector<double> mass;
  std::size_t sample_count = 0;  ///< 0 for exact (non-sampled) laws

  /// Validates ordering, nonnegativity and unit total mass (1e-12).
  static EmpiricalLaw from_parts(std::vector<std::int64_t> support, std::vector<double> mass,
                                 std::size_t sample_count = 0);
  /// Exact law on {offset, offset + 1, ...}; zero entries are dropped.
  static EmpiricalLaw from_dense(std::span<const double> pmf, std::int64_t offset = 0);
  static EmpiricalLaw point_mass(std::int64_t x);

  double at(std::int64_t x) const;
  double total_mass() const;
};

/// sum_k |p(k) - q(k)| over the union of supports. This is the L1 norm, i.e.
/// twice the total-variation distance.
double pmf_l1(const EmpiricalLaw& p, const EmpiricalLaw& q);

/// L1 / 2, for display only.
inline double pmf_tv(const EmpiricalLaw& p, const EmpiricalLaw& q) { return 0.5 * pmf_l1(p, q); }

/// Normalized counts of the samples. Throws DomainError on empty input.
EmpiricalLaw empirical_pmf(std::span<const std::int64_t> samples);

/// Weighted superposition sum_i w_i p_i. Weights must be nonnegative and sum to
/// 1 within 1e-9.
EmpiricalLaw mixture_pmf(std::span<const std::pair<EmpiricalLaw, double>> atoms);

/// CSV with a '#' comment line, a "point,mass" header and one row per atom.
void write_csv(std::ostream& out, const EmpiricalLaw& law);
EmpiricalLaw read_csv(std::istream& in);

}  // namespace clonekit
