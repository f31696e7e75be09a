#include "clonekit/tv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "clonekit/error.hpp"

namespace clonekit {

EmpiricalLaw EmpiricalLaw::from_parts(std::vector<std::int64_t> support, std::vector<double> mass,
                                      std::size_t sample_count) {
  if (support.size() != mass.size()) throw DomainError("EmpiricalLaw: support and mass differ in length");
  if (support.empty()) throw DomainError("EmpiricalLaw: empty support");
  for (std::size_t i = 1; i < support.size(); ++i) {
    if (support[i] <= support[i - 1]) throw DomainError("EmpiricalLaw: support must be strictly increasing");
  }
  double total = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0)) throw DomainError("EmpiricalLaw: negative mass");
    total += m;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw DomainError("EmpiricalLaw: masses must sum to 1");
  EmpiricalLaw law;
  law.support = std::move(support);
  law.mass = std::move(mass);
  law.sample_count = sample_count;
  return law;
}

EmpiricalLaw EmpiricalLaw::from_dense(std::span<const double> pmf, std::int64_t offset) {
  EmpiricalLaw law;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (pmf[i] < 0.0) throw DomainError("EmpiricalLaw: negative mass");
    if (pmf[i] > 0.0) {
      law.support.push_back(offset + static_cast<std::int64_t>(i));
      law.mass.push_back(pmf[i]);
    }
  }
  if (law.support.empty()) throw DomainError("EmpiricalLaw: empty support");
  if (std::fabs(law.total_mass() - 1.0) > 1e-12) throw DomainError("EmpiricalLaw: masses must sum to 1");
  return law;
}

EmpiricalLaw EmpiricalLaw::point_mass(std::int64_t x) { return from_parts({x}, {1.0}); }

double EmpiricalLaw::at(std::int64_t x) const {
  const auto it = std::lower_bound(support.begin(), support.end(), x);
  if (it == support.end() || *it != x) return 0.0;
  return mass[static_cast<std::size_t>(it - support.begin())];
}

double EmpiricalLaw::total_mass() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

double pmf_l1(const EmpiricalLaw& p, const EmpiricalLaw& q) {
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < p.support.size() || j < q.support.size()) {
    if (j == q.support.size() || (i < p.support.size() && p.support[i] < q.support[j])) {
      sum += p.mass[i++];
    } else if (i == p.support.size() || q.support[j] < p.support[i]) {
      sum += q.mass[j++];
    } else {
      sum += std::fabs(p.mass[i++] - q.mass[j++]);
    }
  }
  return std::min(sum, 2.0);
}

EmpiricalLaw empirical_pmf(std::span<const std::int64_t> samples) {
  if (samples.empty()) throw DomainError("empirical_pmf: no samples");
  std::vector<std::int64_t> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  EmpiricalLaw law;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    law.support.push_back(sorted[i]);
    law.mass.push_back(static_cast<double>(j - i) / n);
    i = j;
  }
  law.sample_count = sorted.size();
  return law;
}

EmpiricalLaw mixture_pmf(std::span<const std::pair<EmpiricalLaw, double>> atoms) {
  if (atoms.empty()) throw DomainError("mixture_pmf: no components");
  double weight_sum = 0.0;
  for (const auto& [law, w] : atoms) {
    if (!(w >= 0.0)) throw DomainError("mixture_pmf: negative weight");
    weight_sum += w;
  }
  if (std::fabs(weight_sum - 1.0) > 1e-9) throw DomainError("mixture_pmf: weights must sum to 1");
  std::map<std::int64_t, double> acc;
  std::size_t count = 0;
  for (const auto& [law, w] : atoms) {
    for (std::size_t k = 0; k < law.support.size(); ++k) acc[law.support[k]] += w * law.mass[k];
    count += law.sample_count;
  }
  EmpiricalLaw out;
  out.support.reserve(acc.size());
  out.mass.reserve(acc.size());
  for (const auto& [x, m] : acc) {
    out.support.push_back(x);
    out.mass.push_back(m);
  }
  out.sample_count = count;
  return out;
}

void write_csv(std::ostream& out, const EmpiricalLaw& law) {
  out << "# columns: point (integer lattice point), mass (probability); sample_count=" << law.sample_count << '\n';
  out << "point,mass\n";
  char buf[64];
  for (std::size_t i = 0; i < law.support.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", law.mass[i]);
    out << law.support[i] << ',' << buf << '\n';
  }
}

EmpiricalLaw read_csv(std::istream& in) {
  std::string line;
  std::vector<std::int64_t> support;
  std::vector<double> mass;
  std::size_t sample_count = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("sample_count=");
      if (pos != std::string::npos) sample_count = std::stoull(line.substr(pos + 13));
      continue;
    }
    if (!header_seen) {
      if (line != "point,mass") throw ConfigError("EmpiricalLaw CSV: expected 'point,mass' header");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("EmpiricalLaw CSV: malformed row '" + line + "'");
    support.push_back(std::stoll(line.substr(0, comma)));
    mass.push_back(std::stod(line.substr(comma + 1)));
  }
  return EmpiricalLaw::from_parts(std::move(support), std::move(mass), sample_count);
}

}  // namespace clonekit
