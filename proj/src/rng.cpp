#include "logeuc/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "logeuc/errors.hpp"

namespace logeuc {

std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  for (std::uint64_t v : stream) {
    // Each index passes through the full output mix before the next one is
    // folded in; the offset keeps a zero index from being a no-op.
    s = h ^ (v + 0xD1B54A32D192ED03ULL);
    h = splitmix64(s);
  }
  return h;
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  if (n == 0) throw InvalidRange("uniform_below: n must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * f;
  has_cached_normal_ = true;
  return u * f;
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw InvalidRange("gamma: shape must be positive");
  if (shape < 1.0) {
    // Boost to shape+1 and scale back: X = Y * U^(1/shape).
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::chi(double k) { return std::sqrt(2.0 * gamma(0.5 * k)); }

void Rng::fill_signs(std::int8_t* out, std::size_t n) {
  // Spend one u64 per 64 signs.
  std::size_t i = 0;
  while (i < n) {
    std::uint64_t bits = next_u64();
    for (int b = 0; b < 64 && i < n; ++b, ++i) {
      out[i] = (bits & 1u) ? std::int8_t{1} : std::int8_t{-1};
      bits >>= 1;
    }
  }
}

void Rng::shuffle(std::vector<std::size_t>& idx) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = uniform_below(i);
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace logeuc
