#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "logeuc/matrix.hpp"
#include "logeuc/rng.hpp"

namespace logeuc {

enum class Scheme { Rgw, TrigRff, MacLaurin, HadamardFastfood };

/// Stable identifiers used in CLI flags and file containers:
/// "rgw", "rff", "maclaurin", "fastfood".
std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

/// Geometric degree distribution rho(n) = theta*(1-theta)^n truncated at
/// n_max and renormalized over 0..n_max.
struct DegreeDistribution {
  double theta = 0.5;
  int n_max = 64;

  /// Throws ThetaOutOfRange unless 0 < theta < 1. theta = 0 would put zero
  /// mass everywhere, so it is rejected even though the geometric family is
  /// often quoted with a closed lower bound.
  static DegreeDistribution geometric(double theta, int n_max = 64);

  double raw_pmf(int n) const;  // theta*(1-theta)^n, untruncated
  double pmf(int n) const;      // renormalized over 0..n_max
};

/// Inversion sampling of the untruncated geometric law; throws DegreeOverflow
/// when the drawn degree exceeds n_max (truncation too tight for this theta).
int sample_truncated_degree(Rng& rng, double theta, int n_max);

/// Random tensor-product feature map. Component j carries a sampled degree
/// n_j, n_j factor matrices (d x d, entries i.i.d. N(0, sigma^2)) stored
/// flat, and a precomputed coefficient
///   sigma^(-2n) * sqrt(exp(-sigma^-2) / (nu * pmf(n) * n!)).
/// The d^n x d^n tensor-power weight is never materialized; evaluation uses
/// the factored product of Frobenius inner products.
struct RgwMap {
  std::size_t d = 0;
  std::size_t nu = 0;
  double sigma = 1.0;
  DegreeDistribution dist;
  std::uint64_t seed = 0;

  std::vector<int> degrees;           // nu entries
  std::vector<double> coefficients;   // nu entries
  std::vector<std::size_t> offsets;   // nu+1 prefix sums of degrees
  std::vector<double> factors;        // offsets[nu] * d * d doubles

  /// Factor matrix alpha (0-based) of component j as a d x d view copy.
  Matrix factor(std::size_t j, std::size_t alpha) const;
};

struct TrigRffParams {
  std::vector<double> omega;  // nu * d^2, rows are frequency vectors
  std::vector<double> phase;  // nu, uniform [0, 2pi)
};

struct MacLaurinParams {
  std::vector<int> degrees;            // nu
  std::vector<double> scales;          // nu, sqrt(a_N / (nu * p(N)))
  std::vector<std::size_t> offsets;    // nu+1 prefix sums of degrees
  std::vector<std::int8_t> signs;      // offsets[nu] * d^2 Rademacher entries
};

struct FastfoodParams {
  std::size_t padded_dim = 0;  // power of two >= d^2
  std::size_t blocks = 0;      // ceil(nu / padded_dim)
  std::vector<std::int8_t> sign;    // blocks * padded_dim
  std::vector<double> gauss;        // blocks * padded_dim
  std::vector<double> scale;        // blocks * padded_dim
  std::vector<std::uint32_t> perm;  // blocks * padded_dim
  std::vector<double> phase;        // blocks * padded_dim, uniform [0, 2pi)
};

/// One of the three reference schemes, tagged by `scheme`; only the matching
/// parameter block is populated.
struct BaselineMap {
  Scheme scheme = Scheme::TrigRff;
  std::size_t d = 0;
  std::size_t nu = 0;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  TrigRffParams trig;
  MacLaurinParams maclaurin;
  FastfoodParams fastfood;
};

/// Sampling: every component (or Fastfood block) draws from its own
/// substream of `seed`, so instantiation is order-independent and two maps
/// with equal parameters are identical.
RgwMap sample_rgw_map(std::size_t d, std::size_t nu, double sigma,
                      const DegreeDistribution& dist, std::uint64_t seed);
BaselineMap sample_trig_rff(std::size_t d, std::size_t nu, double sigma, std::uint64_t seed);
BaselineMap sample_maclaurin(std::size_t d, std::size_t nu, double sigma, std::uint64_t seed,
                             int n_max = 64);
BaselineMap sample_fastfood(std::size_t d, std::size_t nu, double sigma, std::uint64_t seed);

/// Application. Inputs must be d x d with Frobenius norm within 1e-6 of 1
/// (NormViolation otherwise).
std::vector<double> apply_rgw(const RgwMap& map, const Matrix& x);
std::vector<double> apply_trig_rff(const BaselineMap& map, const Matrix& x);
std::vector<double> apply_maclaurin(const BaselineMap& map, const Matrix& x);
std::vector<double> apply_fastfood(const BaselineMap& map, const Matrix& x);

using FeatureMap = std::variant<RgwMap, BaselineMap>;

/// dist is consulted only for Scheme::Rgw.
FeatureMap sample_feature_map(Scheme scheme, std::size_t d, std::size_t nu, double sigma,
                              const DegreeDistribution& dist, std::uint64_t seed);
std::vector<double> apply_feature_map(const FeatureMap& map, const Matrix& x);

/// Rows of the result are apply_feature_map of each input; parallel over
/// inputs, output independent of thread count.
Matrix apply_feature_map_batch(const FeatureMap& map, const std::vector<Matrix>& xs);

std::size_t map_output_dim(const FeatureMap& map);
Scheme map_scheme(const FeatureMap& map);

/// Plain dot product of two equal-length feature vectors.
double induced_kernel(const std::vector<double>& f, const std::vector<double>& g);

/// In-place unnormalized Walsh-Hadamard transform (entries of H are +-1, so
/// H*H = p*I). p must be a power of two; O(p log p).
void walsh_hadamard(double* v, std::size_t p);

std::size_t next_pow2(std::size_t n);

/// Block size used by the Fastfood scheme for d x d inputs: next_pow2(d^2).
std::size_t fastfood_padded_dim(std::size_t d);

}  // namespace logeuc
