#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace clonekit {

/// FNV-1a hash, used to key random streams by experiment id.
constexpr std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: output i is mix64(key + (i+1)*golden). A stream is
/// fully determined by its key, so streams keyed by (seed, experiment, replicate)
/// give identical results regardless of scheduling.
///
/// Satisfies UniformRandomBitGenerator. normal() and uniform() are implemented
/// here rather than through <random> distributions so the variates do not depend
/// on the standard library implementation.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key = 0) : key_(mix64(key)) {}

  /// Stream for replicate `replicate` of experiment `experiment` under `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t experiment, std::uint64_t replicate) {
    return Rng(mix64(seed ^ mix64(experiment + 0x9e3779b97f4a7c15ULL)) ^ mix64(replicate * 0xd1b54a32d192ed03ULL + 1));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(key_ + counter_);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal();

  /// Independent child stream (for handing to a sub-computation).
  Rng split() { return Rng((*this)()); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace clonekit
