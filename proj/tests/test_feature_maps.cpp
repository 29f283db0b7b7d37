#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "logeuc/errors.hpp"
#include "logeuc/feature_maps.hpp"
#include "logeuc/rng.hpp"
#include "logeuc/spd_core.hpp"
#include "oracles.hpp"

using namespace logeuc;

namespace {

// Unit-Frobenius-norm symmetric matrix: the feature maps' input domain.
Matrix unit_symmetric(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double v = rng.normal();
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return normalize_log(m);
}

double exact_kernel_dot(const Matrix& x, const Matrix& y, double sigma) {
  return std::exp((frobenius_dot(x, y) - 1.0) / (sigma * sigma));
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

TEST_SUITE("feature_maps") {

TEST_CASE("scheme names round trip and reject junk") {
  for (const Scheme s : {Scheme::Rgw, Scheme::TrigRff, Scheme::MacLaurin,
                         Scheme::HadamardFastfood}) {
    CHECK(scheme_from_name(scheme_name(s)) == s);
  }
  CHECK(scheme_name(Scheme::Rgw) == "rgw");
  CHECK(scheme_name(Scheme::TrigRff) == "rff");
  CHECK(scheme_name(Scheme::MacLaurin) == "maclaurin");
  CHECK(scheme_name(Scheme::HadamardFastfood) == "fastfood");
  CHECK_THROWS_AS(scheme_from_name("gaussian"), InvalidRange);
}

TEST_CASE("degree distribution validates theta and normalizes") {
  CHECK_THROWS_AS(DegreeDistribution::geometric(0.0, 64), ThetaOutOfRange);
  CHECK_THROWS_AS(DegreeDistribution::geometric(1.0, 64), ThetaOutOfRange);
  CHECK_THROWS_AS(DegreeDistribution::geometric(-0.2, 64), ThetaOutOfRange);
  CHECK_THROWS_AS(DegreeDistribution::geometric(1.3, 64), ThetaOutOfRange);

  const DegreeDistribution dist = DegreeDistribution::geometric(0.3, 20);
  double total = 0.0;
  for (int n = 0; n <= 20; ++n) {
    CHECK(dist.raw_pmf(n) == doctest::Approx(0.3 * std::pow(0.7, n)));
    CHECK(dist.pmf(n) > dist.raw_pmf(n));  // renormalization inflates each term
    total += dist.pmf(n);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degree sampling matches the geometric law: chi-squared fit") {
  // theta = 0.5, 10^4 draws, bins 0..9 plus pooled tail, df = 10.
  // Frozen critical value: chi2stat at alpha = 0.01 with df 10 is 23.209.
  Rng rng(20240816);
  const int draws = 10000;
  std::vector<int> counts(11, 0);
  for (int i = 0; i < draws; ++i) {
    const int n = sample_truncated_degree(rng, 0.5, 64);
    ++counts[std::min(n, 10)];
  }
  double chi2 = 0.0;
  for (int bin = 0; bin <= 10; ++bin) {
    const double p = bin < 10 ? std::pow(0.5, bin + 1) : std::pow(0.5, 10);
    const double expected = draws * p;
    const double diff = counts[bin] - expected;
    chi2 += diff * diff / expected;
  }
  CHECK(chi2 < 23.209);
}

TEST_CASE("degree sampling throws DegreeOverflow when theta is too small") {
  // With theta = 1e-6, P(n <= 64) is about 6.5e-5, so a handful of draws is
  // certain to overflow the truncation bound.
  Rng rng(4);
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 50; ++i) sample_truncated_degree(rng, 1e-6, 64);
      }(),
      DegreeOverflow);
}

TEST_CASE("rgw map layout and coefficient formula") {
  const std::size_t d = 4, nu = 64;
  const double sigma = 1.3;
  const DegreeDistribution dist = DegreeDistribution::geometric(0.5, 64);
  const RgwMap map = sample_rgw_map(d, nu, sigma, dist, 99);

  REQUIRE(map.degrees.size() == nu);
  REQUIRE(map.coefficients.size() == nu);
  REQUIRE(map.offsets.size() == nu + 1);
  CHECK(map.offsets[0] == 0);
  std::size_t total = 0;
  for (std::size_t j = 0; j < nu; ++j) {
    total += static_cast<std::size_t>(map.degrees[j]);
    CHECK(map.offsets[j + 1] == total);
  }
  CHECK(map.factors.size() == total * d * d);

  for (std::size_t j = 0; j < nu; ++j) {
    const int n = map.degrees[j];
    const double direct = std::pow(sigma, -2.0 * n) *
                          std::sqrt(std::exp(-1.0 / (sigma * sigma)) /
                                    (nu * dist.pmf(n) * std::exp(log_factorial(n))));
    CHECK(map.coefficients[j] == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("rgw factor entries have the advertised spread") {
  const double sigma = 1.5;
  const RgwMap map = sample_rgw_map(6, 400, sigma, DegreeDistribution::geometric(0.5, 64), 7);
  double sum = 0.0, sum2 = 0.0;
  for (double v : map.factors) {
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(map.factors.size());
  REQUIRE(n > 5000);
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 5.0 * sigma / std::sqrt(n));
  CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.05));
}

TEST_CASE("rgw components equal the materialized Kronecker feature") {
  const std::size_t d = 3;
  const Matrix x = unit_symmetric(d, 500);
  const RgwMap map = sample_rgw_map(d, 60, 1.1, DegreeDistribution::geometric(0.5, 64), 3);
  const std::vector<double> feats = apply_rgw(map, x);
  int checked = 0;
  for (std::size_t j = 0; j < map.nu; ++j) {
    if (map.degrees[j] > 3) continue;
    std::vector<Matrix> factors;
    for (int alpha = 0; alpha < map.degrees[j]; ++alpha) {
      factors.push_back(map.factor(j, static_cast<std::size_t>(alpha)));
    }
    const double want = oracle::kron_feature(factors, x, map.coefficients[j]);
    CHECK(feats[j] == doctest::Approx(want).epsilon(1e-10));
    ++checked;
  }
  CHECK(checked >= 40);  // degrees <= 3 carry ~94% of the mass at theta = 0.5
}

TEST_CASE("apply rejects wrong shapes and non-unit norms") {
  const RgwMap map = sample_rgw_map(4, 8, 1.0, DegreeDistribution::geometric(0.5, 64), 1);
  CHECK_THROWS_AS(apply_rgw(map, Matrix(3, 3)), DimensionMismatch);
  Matrix too_big = 2.0 * unit_symmetric(4, 9);
  CHECK_THROWS_AS(apply_rgw(map, too_big), NormViolation);
}

TEST_CASE("every scheme is unbiased for the kernel: moment test") {
  const std::size_t d = 4;
  const double sigma = 1.0;
  const Matrix x = unit_symmetric(d, 21);
  const Matrix y = unit_symmetric(d, 22);
  const double target = exact_kernel_dot(x, y, sigma);
  const DegreeDistribution dist = DegreeDistribution::geometric(0.5, 64);

  for (const Scheme scheme : {Scheme::Rgw, Scheme::TrigRff, Scheme::MacLaurin,
                              Scheme::HadamardFastfood}) {
    const int trials = 3000;
    double sum = 0.0, sum2 = 0.0;
    for (int t = 0; t < trials; ++t) {
      const FeatureMap map = sample_feature_map(
          scheme, d, 2, sigma, dist, derive(777, {static_cast<std::uint64_t>(scheme),
                                                  static_cast<std::uint64_t>(t)}));
      const double k = induced_kernel(apply_feature_map(map, x), apply_feature_map(map, y));
      sum += k;
      sum2 += k * k;
    }
    const double mean = sum / trials;
    const double var = (sum2 - trials * mean * mean) / (trials - 1);
    const double se = std::sqrt(var / trials);
    INFO("scheme " << scheme_name(scheme) << " mean " << mean << " target " << target << " se "
                   << se);
    CHECK(std::abs(mean - target) < 5.0 * se);
  }
}

TEST_CASE("trig rff parameters have the right law") {
  const std::size_t d = 5, nu = 600;
  const double sigma = 2.0;
  const BaselineMap map = sample_trig_rff(d, nu, sigma, 31);
  REQUIRE(map.trig.omega.size() == nu * d * d);
  REQUIRE(map.trig.phase.size() == nu);
  double sum2 = 0.0;
  for (double w : map.trig.omega) sum2 += w * w;
  // omega entries are N(0, 1/sigma^2)
  CHECK(sum2 / map.trig.omega.size() == doctest::Approx(1.0 / (sigma * sigma)).epsilon(0.05));
  for (double p : map.trig.phase) {
    REQUIRE(p >= 0.0);
    REQUIRE(p < 2.0 * 3.14159265358979323846);
  }
  // features bounded by the cosine envelope
  const Matrix x = unit_symmetric(d, 17);
  for (double f : apply_trig_rff(map, x)) {
    CHECK(std::abs(f) <= std::sqrt(2.0 / nu) + 1e-12);
  }
}

TEST_CASE("maclaurin components recompute from their raw parameters") {
  const std::size_t d = 3, nu = 50;
  const double sigma = 1.2;
  const BaselineMap map = sample_maclaurin(d, nu, sigma, 41);
  const Matrix x = unit_symmetric(d, 43);
  const std::vector<double> feats = apply_maclaurin(map, x);

  // vec(x) in row-major order
  std::vector<double> vx(x.data(), x.data() + x.size());
  double mean_degree = 0.0;
  for (std::size_t j = 0; j < nu; ++j) {
    const int deg = map.maclaurin.degrees[j];
    mean_degree += deg;
    // scale = sqrt(a_N / (nu p(N))), a_N = exp(-1/sigma^2) / (sigma^(2N) N!)
    const double a_n = std::exp(-1.0 / (sigma * sigma)) /
                       (std::pow(sigma, 2.0 * deg) * std::exp(log_factorial(deg)));
    const double p_n = std::pow(0.5, deg + 1);
    CHECK(map.maclaurin.scales[j] ==
          doctest::Approx(std::sqrt(a_n / (nu * p_n))).epsilon(1e-12));

    double prod = map.maclaurin.scales[j];
    for (int alpha = 0; alpha < deg; ++alpha) {
      const std::int8_t* w =
          map.maclaurin.signs.data() + (map.maclaurin.offsets[j] + alpha) * d * d;
      double dot = 0.0;
      for (std::size_t k = 0; k < vx.size(); ++k) dot += w[k] * vx[k];
      prod *= dot;
    }
    CHECK(feats[j] == doctest::Approx(prod).epsilon(1e-12));
  }
  // E[N] = 1 under p(N) = 2^-(N+1)
  CHECK(mean_degree / nu == doctest::Approx(1.0).epsilon(0.75));
  for (std::int8_t s : map.maclaurin.signs) REQUIRE((s == 1 || s == -1));
}

TEST_CASE("walsh_hadamard agrees with the dense matrix and inverts itself") {
  Rng rng(55);
  for (const std::size_t p : {std::size_t{1}, std::size_t{2}, std::size_t{8}, std::size_t{64}}) {
    std::vector<double> v(p);
    for (double& e : v) e = rng.normal();
    std::vector<double> got = v;
    walsh_hadamard(got.data(), p);
    const std::vector<double> want = oracle::walsh_hadamard_dense(v);
    for (std::size_t i = 0; i < p; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    // H H = p I
    walsh_hadamard(got.data(), p);
    for (std::size_t i = 0; i < p; ++i) {
      CHECK(got[i] == doctest::Approx(static_cast<double>(p) * v[i]).epsilon(1e-12));
    }
  }
  std::vector<double> bad(12, 0.0);
  CHECK_THROWS_AS(walsh_hadamard(bad.data(), 12), NotPowerOfTwo);
}

TEST_CASE("next_pow2 and the fastfood block size") {
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(2) == 2);
  CHECK(next_pow2(3) == 4);
  CHECK(next_pow2(9) == 16);
  CHECK(next_pow2(1024) == 1024);
  CHECK(next_pow2(1764) == 2048);
  CHECK(fastfood_padded_dim(3) == 16);   // 9 -> 16
  CHECK(fastfood_padded_dim(4) == 16);   // 16 -> 16
  CHECK(fastfood_padded_dim(5) == 32);   // 25 -> 32
  CHECK(fastfood_padded_dim(42) == 2048);
}

TEST_CASE("fastfood equals the dense chain S H G P H B") {
  const std::size_t d = 3;
  const std::size_t p = fastfood_padded_dim(d);  // 16
  const std::size_t nu = 20;                     // two blocks, second truncated
  const double sigma = 1.4;
  const BaselineMap map = sample_fastfood(d, nu, sigma, 61);
  REQUIRE(map.fastfood.padded_dim == p);
  REQUIRE(map.fastfood.blocks == 2);

  const Matrix x = unit_symmetric(d, 62);
  std::vector<double> padded(p, 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) padded[k] = x.data()[k];

  const std::vector<double> got = apply_fastfood(map, x);
  REQUIRE(got.size() == nu);

  for (std::size_t b = 0; b < map.fastfood.blocks; ++b) {
    // w1 = H * (sign .* padded), densely
    std::vector<double> signed_in(p);
    for (std::size_t i = 0; i < p; ++i) {
      signed_in[i] = map.fastfood.sign[b * p + i] * padded[i];
    }
    const std::vector<double> w1 = oracle::walsh_hadamard_dense(signed_in);
    std::vector<double> permuted(p);
    for (std::size_t i = 0; i < p; ++i) permuted[i] = w1[map.fastfood.perm[b * p + i]];
    std::vector<double> gaussed(p);
    for (std::size_t i = 0; i < p; ++i) gaussed[i] = map.fastfood.gauss[b * p + i] * permuted[i];
    const std::vector<double> w2 = oracle::walsh_hadamard_dense(gaussed);
    for (std::size_t i = 0; i < p; ++i) {
      const std::size_t out = b * p + i;
      if (out >= nu) break;
      const double v = map.fastfood.scale[b * p + i] * w2[i];
      const double want = std::sqrt(2.0 / nu) * std::cos(v + map.fastfood.phase[b * p + i]);
      CHECK(got[out] == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("fastfood projection rows are marginally N(0, 1/sigma^2)") {
  // The chi-length times uniform-direction construction should make each
  // entry of V exactly Gaussian; check second moments across many maps.
  const std::size_t d = 3;
  const std::size_t p = fastfood_padded_dim(d);
  const double sigma = 1.25;
  double sum2 = 0.0;
  double cross = 0.0;
  std::size_t count = 0;
  for (int t = 0; t < 400; ++t) {
    const BaselineMap map = sample_fastfood(d, p, sigma, derive(4242, {(std::uint64_t)t}));
    // column 0 of V = S H G P H B e_0, densely
    std::vector<double> basis(p, 0.0);
    basis[0] = 1.0;
    std::vector<double> signed_in(p);
    for (std::size_t i = 0; i < p; ++i) signed_in[i] = map.fastfood.sign[i] * basis[i];
    const std::vector<double> w1 = oracle::walsh_hadamard_dense(signed_in);
    std::vector<double> permuted(p);
    for (std::size_t i = 0; i < p; ++i) permuted[i] = w1[map.fastfood.perm[i]];
    std::vector<double> gaussed(p);
    for (std::size_t i = 0; i < p; ++i) gaussed[i] = map.fastfood.gauss[i] * permuted[i];
    const std::vector<double> w2 = oracle::walsh_hadamard_dense(gaussed);
    const double v00 = map.fastfood.scale[0] * w2[0];
    const double v10 = map.fastfood.scale[1] * w2[1];
    sum2 += v00 * v00;
    cross += v00 * v10;
    ++count;
  }
  const double var = sum2 / count;
  CHECK(var == doctest::Approx(1.0 / (sigma * sigma)).epsilon(0.2));
  CHECK(std::abs(cross / count) < 0.05);
}

TEST_CASE("dispatchers agree with the direct paths") {
  const std::size_t d = 4, nu = 12;
  const Matrix x = unit_symmetric(d, 71);
  const DegreeDistribution dist = DegreeDistribution::geometric(0.5, 64);
  for (const Scheme scheme : {Scheme::Rgw, Scheme::TrigRff, Scheme::MacLaurin,
                              Scheme::HadamardFastfood}) {
    const FeatureMap map = sample_feature_map(scheme, d, nu, 1.0, dist, 81);
    CHECK(map_scheme(map) == scheme);
    CHECK(map_output_dim(map) == nu);
    const std::vector<double> f = apply_feature_map(map, x);
    CHECK(f.size() == nu);
  }
}

TEST_CASE("batch application equals per-item application") {
  const std::size_t d = 5;
  std::vector<Matrix> xs;
  for (std::uint64_t k = 0; k < 7; ++k) xs.push_back(unit_symmetric(d, 900 + k));
  const FeatureMap map =
      sample_feature_map(Scheme::Rgw, d, 16, 1.0, DegreeDistribution::geometric(0.5, 64), 5);
  const Matrix batch = apply_feature_map_batch(map, xs);
  REQUIRE(batch.rows() == xs.size());
  REQUIRE(batch.cols() == 16);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::vector<double> one = apply_feature_map(map, xs[i]);
    for (std::size_t j = 0; j < one.size(); ++j) CHECK(batch(i, j) == one[j]);
  }
}

TEST_CASE("sampling is seed-deterministic and seed-sensitive") {
  const Matrix x = unit_symmetric(4, 1000);
  const DegreeDistribution dist = DegreeDistribution::geometric(0.5, 64);
  for (const Scheme scheme : {Scheme::Rgw, Scheme::TrigRff, Scheme::MacLaurin,
                              Scheme::HadamardFastfood}) {
    const FeatureMap a = sample_feature_map(scheme, 4, 10, 1.0, dist, 123);
    const FeatureMap b = sample_feature_map(scheme, 4, 10, 1.0, dist, 123);
    const FeatureMap c = sample_feature_map(scheme, 4, 10, 1.0, dist, 124);
    CHECK(apply_feature_map(a, x) == apply_feature_map(b, x));
    CHECK(apply_feature_map(a, x) != apply_feature_map(c, x));
  }
}

TEST_CASE("induced_kernel validates lengths") {
  CHECK(induced_kernel({1.0, 2.0}, {3.0, 4.0}) == doctest::Approx(11.0));
  CHECK_THROWS_AS(induced_kernel({1.0}, {1.0, 2.0}), LengthMismatch);
}

TEST_CASE("variance shrinks as nu grows") {
  const std::size_t d = 4;
  const Matrix x = unit_symmetric(d, 3001);
  const Matrix y = unit_symmetric(d, 3002);
  const DegreeDistribution dist = DegreeDistribution::geometric(0.5, 64);
  double var_small = 0.0, var_big = 0.0;
  for (const std::size_t nu : {std::size_t{8}, std::size_t{64}}) {
    const int trials = 1500;
    double sum = 0.0, sum2 = 0.0;
    for (int t = 0; t < trials; ++t) {
      const FeatureMap map =
          sample_feature_map(Scheme::Rgw, d, nu, 1.0, dist, derive(888, {nu, (std::uint64_t)t}));
      const double k = induced_kernel(apply_feature_map(map, x), apply_feature_map(map, y));
      sum += k;
      sum2 += k * k;
    }
    const double mean = sum / trials;
    const double var = (sum2 - trials * mean * mean) / (trials - 1);
    (nu == 8 ? var_small : var_big) = var;
  }
  CHECK(var_big < 0.5 * var_small);
}

}  // TEST_SUITE
