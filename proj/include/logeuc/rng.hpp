#pragma once

#include <cstdint>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace logeuc {

/// splitmix64 output mix. Maps any 64-bit input to a well-scrambled 64-bit
/// output; used both as the generator step and for deriving substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministically mixes a seed with a list of stream indices, so that
/// (seed, i, j) and (seed, i, j') give statistically independent streams.
/// Used to give each feature-map component, each data sequence, and each
/// parallel slot its own generator without any cross-talk.
std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

/// Small deterministic PRNG. Not cryptographic; intended for Monte-Carlo
/// sampling where reproducibility across platforms matters.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform on [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive. Uses rejection to avoid
  /// modulo bias.
  std::uint64_t uniform_below(std::uint64_t n);

  /// Standard normal via the polar (Marsaglia) method; the second value of
  /// each generated pair is cached.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Gamma(shape, 1) for shape > 0, Marsaglia-Tsang squeeze method.
  double gamma(double shape);

  /// chi distribution with k degrees of freedom: sqrt(2 * Gamma(k/2, 1)).
  double chi(double k);

  /// Fills out with independent Rademacher signs (+1 / -1).
  void fill_signs(std::int8_t* out, std::size_t n);

  /// Fisher-Yates shuffle of indices [0, n).
  void shuffle(std::vector<std::size_t>& idx);

 private:
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace logeuc
