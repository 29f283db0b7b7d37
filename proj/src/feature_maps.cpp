#include "logeuc/feature_maps.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "logeuc/errors.hpp"
#include "logeuc/parallel.hpp"

namespace logeuc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void require_unit_input(const Matrix& x, std::size_t d) {
  if (x.rows() != d || x.cols() != d) {
    throw DimensionMismatch("feature map input must be " + std::to_string(d) + "x" +
                            std::to_string(d) + ", got " + std::to_string(x.rows()) + "x" +
                            std::to_string(x.cols()));
  }
  const double norm = frobenius_norm(x);
  if (std::abs(norm - 1.0) > 1e-6) {
    throw NormViolation("feature map input must have unit Frobenius norm, got " +
                        std::to_string(norm));
  }
}

double flat_dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

double sign_dot(const std::int8_t* s, const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += s[k] > 0 ? x[k] : -x[k];
  return acc;
}

}  // namespace

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Rgw: return "rgw";
    case Scheme::TrigRff: return "rff";
    case Scheme::MacLaurin: return "maclaurin";
    case Scheme::HadamardFastfood: return "fastfood";
  }
  throw InvalidRange("scheme_name: unknown scheme tag");
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "rgw") return Scheme::Rgw;
  if (name == "rff") return Scheme::TrigRff;
  if (name == "maclaurin") return Scheme::MacLaurin;
  if (name == "fastfood") return Scheme::HadamardFastfood;
  throw InvalidRange("scheme_from_name: unknown scheme '" + name + "'");
}

DegreeDistribution DegreeDistribution::geometric(double theta, int n_max) {
  if (!(theta > 0.0) || !(theta < 1.0)) {
    throw ThetaOutOfRange("geometric degree distribution needs 0 < theta < 1, got " +
                          std::to_string(theta));
  }
  if (n_max < 0) throw InvalidRange("geometric degree distribution: n_max must be >= 0");
  DegreeDistribution d;
  d.theta = theta;
  d.n_max = n_max;
  return d;
}

double DegreeDistribution::raw_pmf(int n) const {
  if (n < 0) return 0.0;
  return theta * std::pow(1.0 - theta, n);
}

double DegreeDistribution::pmf(int n) const {
  if (n < 0 || n > n_max) return 0.0;
  const double z = 1.0 - std::pow(1.0 - theta, n_max + 1);
  return raw_pmf(n) / z;
}

int sample_truncated_degree(Rng& rng, double theta, int n_max) {
  if (!(theta > 0.0) || !(theta < 1.0)) {
    throw ThetaOutOfRange("sample_truncated_degree needs 0 < theta < 1");
  }
  const double u = rng.uniform();
  // Inversion of the untruncated geometric CDF; u < 1 keeps log1p finite.
  const double n = std::floor(std::log1p(-u) / std::log1p(-theta));
  if (n > static_cast<double>(n_max)) {
    throw DegreeOverflow("sampled degree " + std::to_string(n) + " exceeds truncation bound " +
                         std::to_string(n_max) + "; raise n_max or theta");
  }
  return n < 0.0 ? 0 : static_cast<int>(n);
}

Matrix RgwMap::factor(std::size_t j, std::size_t alpha) const {
  if (j >= nu) throw IndexOutOfRange("RgwMap::factor: component index out of range");
  if (alpha >= static_cast<std::size_t>(degrees[j])) {
    throw IndexOutOfRange("RgwMap::factor: factor index out of range");
  }
  Matrix f(d, d);
  const double* src = factors.data() + (offsets[j] + alpha) * d * d;
  std::memcpy(f.data(), src, sizeof(double) * d * d);
  return f;
}

RgwMap sample_rgw_map(std::size_t d, std::size_t nu, double sigma,
                      const DegreeDistribution& dist, std::uint64_t seed) {
  if (d < 1 || nu < 1) throw InvalidRange("sample_rgw_map: need d >= 1 and nu >= 1");
  if (!(sigma > 0.0)) throw InvalidRange("sample_rgw_map: sigma must be positive");

  RgwMap m;
  m.d = d;
  m.nu = nu;
  m.sigma = sigma;
  m.dist = dist;
  m.seed = seed;
  m.degrees.resize(nu);
  m.coefficients.resize(nu);
  m.offsets.resize(nu + 1);

  const double inv_sigma_sq = 1.0 / (sigma * sigma);
  const double log_sigma = std::log(sigma);
  const double log_nu = std::log(static_cast<double>(nu));

  m.offsets[0] = 0;
  for (std::size_t j = 0; j < nu; ++j) {
    Rng rng(derive(seed, {j}));
    const int n = sample_truncated_degree(rng, dist.theta, dist.n_max);
    m.degrees[j] = n;
    m.offsets[j + 1] = m.offsets[j] + static_cast<std::size_t>(n);

    const double log_coeff = -2.0 * n * log_sigma +
                             0.5 * (-inv_sigma_sq - log_nu - std::log(dist.pmf(n)) -
                                    std::lgamma(static_cast<double>(n) + 1.0));
    const double coeff = std::exp(log_coeff);
    if (!std::isfinite(coeff) || !(coeff > 0.0)) {
      throw DegenerateSeries("sample_rgw_map: component coefficient not finite and positive at "
                             "degree " + std::to_string(n));
    }
    m.coefficients[j] = coeff;
  }

  m.factors.resize(m.offsets[nu] * d * d);
  for (std::size_t j = 0; j < nu; ++j) {
    // Re-derive the component stream and skip the degree draw so the factor
    // entries land exactly where a single-pass sampler would put them.
    Rng rng(derive(seed, {j}));
    (void)sample_truncated_degree(rng, dist.theta, dist.n_max);
    double* dst = m.factors.data() + m.offsets[j] * d * d;
    const std::size_t count = static_cast<std::size_t>(m.degrees[j]) * d * d;
    for (std::size_t k = 0; k < count; ++k) dst[k] = rng.normal(0.0, sigma);
  }
  return m;
}

std::vector<double> apply_rgw(const RgwMap& map, const Matrix& x) {
  require_unit_input(x, map.d);
  const std::size_t dd = map.d * map.d;
  std::vector<double> out(map.nu);
  for (std::size_t j = 0; j < map.nu; ++j) {
    double prod = map.coefficients[j];
    const double* block = map.factors.data() + map.offsets[j] * dd;
    for (int alpha = 0; alpha < map.degrees[j]; ++alpha) {
      prod *= flat_dot(block + static_cast<std::size_t>(alpha) * dd, x.data(), dd);
    }
    out[j] = prod;
  }
  return out;
}

BaselineMap sample_trig_rff(std::size_t d, std::size_t nu, double sigma, std::uint64_t seed) {
  if (d < 1 || nu < 1) throw InvalidRange("sample_trig_rff: need d >= 1 and nu >= 1");
  if (!(sigma > 0.0)) throw InvalidRange("sample_trig_rff: sigma must be positive");

  BaselineMap m;
  m.scheme = Scheme::TrigRff;
  m.d = d;
  m.nu = nu;
  m.sigma = sigma;
  m.seed = seed;
  const std::size_t dd = d * d;
  m.trig.omega.resize(nu * dd);
  m.trig.phase.resize(nu);
  const double freq_sd = 1.0 / sigma;
  for (std::size_t i = 0; i < nu; ++i) {
    Rng rng(derive(seed, {i}));
    double* row = m.trig.omega.data() + i * dd;
    for (std::size_t k = 0; k < dd; ++k) row[k] = rng.normal(0.0, freq_sd);
    m.trig.phase[i] = kTwoPi * rng.uniform();
  }
  return m;
}

std::vector<double> apply_trig_rff(const BaselineMap& map, const Matrix& x) {
  if (map.scheme != Scheme::TrigRff) throw SchemeMismatch("apply_trig_rff: map is not TrigRff");
  require_unit_input(x, map.d);
  const std::size_t dd = map.d * map.d;
  const double norm = std::sqrt(2.0 / static_cast<double>(map.nu));
  std::vector<double> out(map.nu);
  for (std::size_t i = 0; i < map.nu; ++i) {
    const double arg = flat_dot(map.trig.omega.data() + i * dd, x.data(), dd) + map.trig.phase[i];
    out[i] = norm * std::cos(arg);
  }
  return out;
}

BaselineMap sample_maclaurin(std::size_t d, std::size_t nu, double sigma, std::uint64_t seed,
                             int n_max) {
  if (d < 1 || nu < 1) throw InvalidRange("sample_maclaurin: need d >= 1 and nu >= 1");
  if (!(sigma > 0.0)) throw InvalidRange("sample_maclaurin: sigma must be positive");

  BaselineMap m;
  m.scheme = Scheme::MacLaurin;
  m.d = d;
  m.nu = nu;
  m.sigma = sigma;
  m.seed = seed;
  m.maclaurin.degrees.resize(nu);
  m.maclaurin.scales.resize(nu);
  m.maclaurin.offsets.resize(nu + 1);

  const std::size_t dd = d * d;
  const double inv_sigma_sq = 1.0 / (sigma * sigma);
  const double log_sigma = std::log(sigma);
  const double log_nu = std::log(static_cast<double>(nu));
  const double log2v = std::log(2.0);

  m.maclaurin.offsets[0] = 0;
  for (std::size_t j = 0; j < nu; ++j) {
    Rng rng(derive(seed, {j}));
    // The degree measure p(N) = 2^-(N+1) is the geometric law at theta = 1/2.
    const int n = sample_truncated_degree(rng, 0.5, n_max);
    m.maclaurin.degrees[j] = n;
    m.maclaurin.offsets[j + 1] = m.maclaurin.offsets[j] + static_cast<std::size_t>(n);

    // a_N = exp(-sigma^-2) / (sigma^(2N) N!), the series coefficients of
    // k(t) = exp((t - 1)/sigma^2); scale = sqrt(a_N / (nu * p(N))).
    const double log_a = -inv_sigma_sq - 2.0 * n * log_sigma -
                         std::lgamma(static_cast<double>(n) + 1.0);
    const double log_p = -(static_cast<double>(n) + 1.0) * log2v;
    const double scale = std::exp(0.5 * (log_a - log_nu - log_p));
    if (!std::isfinite(scale) || !(scale > 0.0)) {
      throw DegenerateSeries("sample_maclaurin: component scale not finite and positive at "
                             "degree " + std::to_string(n));
    }
    m.maclaurin.scales[j] = scale;
  }

  m.maclaurin.signs.resize(m.maclaurin.offsets[nu] * dd);
  for (std::size_t j = 0; j < nu; ++j) {
    Rng rng(derive(seed, {j}));
    (void)sample_truncated_degree(rng, 0.5, n_max);
    std::int8_t* dst = m.maclaurin.signs.data() + m.maclaurin.offsets[j] * dd;
    rng.fill_signs(dst, static_cast<std::size_t>(m.maclaurin.degrees[j]) * dd);
  }
  return m;
}

std::vector<double> apply_maclaurin(const BaselineMap& map, const Matrix& x) {
  if (map.scheme != Scheme::MacLaurin) {
    throw SchemeMismatch("apply_maclaurin: map is not MacLaurin");
  }
  require_unit_input(x, map.d);
  const std::size_t dd = map.d * map.d;
  std::vector<double> out(map.nu);
  for (std::size_t j = 0; j < map.nu; ++j) {
    double prod = map.maclaurin.scales[j];
    const std::int8_t* block = map.maclaurin.signs.data() + map.maclaurin.offsets[j] * dd;
    for (int alpha = 0; alpha < map.maclaurin.degrees[j]; ++alpha) {
      prod *= sign_dot(block + static_cast<std::size_t>(alpha) * dd, x.data(), dd);
    }
    out[j] = prod;
  }
  return out;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::size_t fastfood_padded_dim(std::size_t d) { return next_pow2(d * d); }

void walsh_hadamard(double* v, std::size_t p) {
  if (p == 0 || (p & (p - 1)) != 0) {
    throw NotPowerOfTwo("walsh_hadamard: length " + std::to_string(p) +
                        " is not a power of two");
  }
  for (std::size_t len = 1; len < p; len <<= 1) {
    for (std::size_t i = 0; i < p; i += 2 * len) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double a = v[j];
        const double b = v[j + len];
        v[j] = a + b;
        v[j + len] = a - b;
      }
    }
  }
}

BaselineMap sample_fastfood(std::size_t d, std::size_t nu, double sigma, std::uint64_t seed) {
  if (d < 1 || nu < 1) throw InvalidRange("sample_fastfood: need d >= 1 and nu >= 1");
  if (!(sigma > 0.0)) throw InvalidRange("sample_fastfood: sigma must be positive");

  BaselineMap m;
  m.scheme = Scheme::HadamardFastfood;
  m.d = d;
  m.nu = nu;
  m.sigma = sigma;
  m.seed = seed;

  const std::size_t p = fastfood_padded_dim(d);
  const std::size_t blocks = (nu + p - 1) / p;
  m.fastfood.padded_dim = p;
  m.fastfood.blocks = blocks;
  m.fastfood.sign.resize(blocks * p);
  m.fastfood.gauss.resize(blocks * p);
  m.fastfood.scale.resize(blocks * p);
  m.fastfood.perm.resize(blocks * p);
  m.fastfood.phase.resize(blocks * p);

  const double k = static_cast<double>(p);
  std::vector<std::size_t> idx(p);
  for (std::size_t b = 0; b < blocks; ++b) {
    Rng rng(derive(seed, {b}));
    const std::size_t base = b * p;

    rng.fill_signs(m.fastfood.sign.data() + base, p);

    for (std::size_t i = 0; i < p; ++i) idx[i] = i;
    rng.shuffle(idx);
    for (std::size_t i = 0; i < p; ++i) {
      m.fastfood.perm[base + i] = static_cast<std::uint32_t>(idx[i]);
    }

    double gnorm_sq = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double g = rng.normal();
      m.fastfood.gauss[base + i] = g;
      gnorm_sq += g * g;
    }
    // Each row of S*H*G*Pi*H*B then has exact marginal law N(0, sigma^-2 I):
    // the chi(p) length draw times the unit row direction restores an
    // isotropic Gaussian, and 1/(sigma*sqrt(p)*||g||) normalizes the row.
    const double denom = sigma * std::sqrt(k) * std::sqrt(gnorm_sq);
    if (!(denom > 0.0)) throw DegenerateSeries("sample_fastfood: zero Gaussian diagonal");
    for (std::size_t i = 0; i < p; ++i) {
      m.fastfood.scale[base + i] = rng.chi(k) / denom;
    }

    for (std::size_t i = 0; i < p; ++i) m.fastfood.phase[base + i] = kTwoPi * rng.uniform();
  }
  return m;
}

std::vector<double> apply_fastfood(const BaselineMap& map, const Matrix& x) {
  if (map.scheme != Scheme::HadamardFastfood) {
    throw SchemeMismatch("apply_fastfood: map is not HadamardFastfood");
  }
  require_unit_input(x, map.d);
  const std::size_t p = map.fastfood.padded_dim;
  if (p == 0 || (p & (p - 1)) != 0) {
    throw NotPowerOfTwo("apply_fastfood: padded_dim must be a power of two");
  }
  const std::size_t dd = map.d * map.d;
  if (p < dd) throw DimensionMismatch("apply_fastfood: padded_dim smaller than d^2");

  std::vector<double> padded(p, 0.0);
  std::memcpy(padded.data(), x.data(), sizeof(double) * dd);

  const double norm = std::sqrt(2.0 / static_cast<double>(map.nu));
  std::vector<double> out(map.nu);
  std::vector<double> work(p), mixed(p);
  for (std::size_t b = 0; b < map.fastfood.blocks; ++b) {
    const std::size_t base = b * p;
    for (std::size_t i = 0; i < p; ++i) {
      work[i] = map.fastfood.sign[base + i] > 0 ? padded[i] : -padded[i];
    }
    walsh_hadamard(work.data(), p);
    for (std::size_t i = 0; i < p; ++i) mixed[i] = work[map.fastfood.perm[base + i]];
    for (std::size_t i = 0; i < p; ++i) mixed[i] *= map.fastfood.gauss[base + i];
    walsh_hadamard(mixed.data(), p);
    const std::size_t limit = std::min(p, map.nu - base);
    for (std::size_t i = 0; i < limit; ++i) {
      const double arg = mixed[i] * map.fastfood.scale[base + i] + map.fastfood.phase[base + i];
      out[base + i] = norm * std::cos(arg);
    }
  }
  return out;
}

FeatureMap sample_feature_map(Scheme scheme, std::size_t d, std::size_t nu, double sigma,
                              const DegreeDistribution& dist, std::uint64_t seed) {
  switch (scheme) {
    case Scheme::Rgw: return sample_rgw_map(d, nu, sigma, dist, seed);
    case Scheme::TrigRff: return sample_trig_rff(d, nu, sigma, seed);
    case Scheme::MacLaurin: return sample_maclaurin(d, nu, sigma, seed, dist.n_max);
    case Scheme::HadamardFastfood: return sample_fastfood(d, nu, sigma, seed);
  }
  throw InvalidRange("sample_feature_map: unknown scheme tag");
}

std::vector<double> apply_feature_map(const FeatureMap& map, const Matrix& x) {
  if (const RgwMap* rgw = std::get_if<RgwMap>(&map)) return apply_rgw(*rgw, x);
  const BaselineMap& base = std::get<BaselineMap>(map);
  switch (base.scheme) {
    case Scheme::TrigRff: return apply_trig_rff(base, x);
    case Scheme::MacLaurin: return apply_maclaurin(base, x);
    case Scheme::HadamardFastfood: return apply_fastfood(base, x);
    default: throw SchemeMismatch("apply_feature_map: baseline map with RGW tag");
  }
}

Matrix apply_feature_map_batch(const FeatureMap& map, const std::vector<Matrix>& xs) {
  const std::size_t nu = map_output_dim(map);
  Matrix out(xs.size(), nu);
  parallel_for(0, xs.size(), [&](std::size_t i) {
    const std::vector<double> row = apply_feature_map(map, xs[i]);
    std::memcpy(out.data() + i * nu, row.data(), sizeof(double) * nu);
  });
  return out;
}

std::size_t map_output_dim(const FeatureMap& map) {
  if (const RgwMap* rgw = std::get_if<RgwMap>(&map)) return rgw->nu;
  return std::get<BaselineMap>(map).nu;
}

Scheme map_scheme(const FeatureMap& map) {
  if (std::get_if<RgwMap>(&map)) return Scheme::Rgw;
  return std::get<BaselineMap>(map).scheme;
}

double induced_kernel(const std::vector<double>& f, const std::vector<double>& g) {
  if (f.size() != g.size()) {
    throw LengthMismatch("induced_kernel: lengths " + std::to_string(f.size()) + " vs " +
                         std::to_string(g.size()));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += f[k] * g[k];
  return s;
}

}  // namespace logeuc
