#pragma once

#include <cstdint>
#include <limits>

namespace massart {

// SplitMix64 (Steele, Lea, Flood 2014). Version-pinned: every seeded stream in
// the library is defined in terms of this exact algorithm, so outputs are
// portable across platforms and standard libraries. Uniform and Gaussian
// variates are derived here rather than through <random> distributions, whose
// algorithms are implementation-defined.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }
  std::uint64_t next();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open_zero();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via the Box-Muller transform; the second variate of each
  // pair is cached.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Independent child stream. Children of the same parent with distinct
  // stream ids do not overlap in practice.
  Rng split(std::uint64_t stream) const { return Rng(derive_seed(state_, stream)); }

  static std::uint64_t mix(std::uint64_t z);
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace massart
