#include "logeuc/estimator_lab.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "logeuc/errors.hpp"
#include "logeuc/kernels.hpp"
#include "logeuc/parallel.hpp"
#include "logeuc/rng.hpp"

namespace logeuc {

CrhoValue compute_c_rho(const DegreeDistribution& dist) {
  // DegreeDistribution::geometric already rejects theta outside (0, 1); this
  // guards values poked in by hand.
  if (!(dist.theta > 0.0) || !(dist.theta < 1.0)) {
    throw ThetaOutOfRange("compute_c_rho: theta must be in (0, 1)");
  }
  CrhoValue v;
  v.theta = dist.theta;
  // 1/(rho(n) n!) = (1/theta) r^n / n! with r = 1/(1-theta); accumulate the
  // term recursively to avoid pow/factorial overflow.
  const double r = 1.0 / (1.0 - dist.theta);
  double term = 1.0 / dist.theta;
  double sum = term;
  for (int n = 1; n <= dist.n_max; ++n) {
    term *= r / static_cast<double>(n);
    sum += term;
  }
  v.truncated_sum = sum;
  v.closed_form = std::exp(r) / dist.theta;
  v.relative_gap = (v.closed_form - v.truncated_sum) / v.closed_form;
  return v;
}

double rgw_variance_bound(const DegreeDistribution& dist, std::size_t nu, double sigma) {
  if (nu < 1) throw InvalidRange("rgw_variance_bound: nu must be >= 1");
  if (!(sigma > 0.0)) throw InvalidRange("rgw_variance_bound: sigma must be positive");
  const CrhoValue c = compute_c_rho(dist);
  const double s2 = sigma * sigma;
  const double n3 = static_cast<double>(nu) * static_cast<double>(nu) * static_cast<double>(nu);
  return c.closed_form / n3 * std::exp((3.0 - 2.0 * s2) / (s2 * s2));
}

EstimatorReport run_bias_trial(const Matrix& x, const Matrix& y, Scheme scheme, std::size_t nu,
                               double sigma, const DegreeDistribution& dist, std::size_t trials,
                               std::uint64_t seed, const std::string& pair_id) {
  if (trials < 1000) {
    throw InsufficientTrials("run_bias_trial: need at least 1000 trials, got " +
                             std::to_string(trials));
  }
  EstimatorReport r;
  r.pair_id = pair_id;
  r.scheme = scheme;
  r.nu = nu;
  r.trials = trials;
  r.exact_value = log_euclidean_kernel(x, y, sigma);
  r.trial_values.resize(trials);

  const std::size_t d = x.rows();
  parallel_for(0, trials, [&](std::size_t t) {
    const FeatureMap map = sample_feature_map(scheme, d, nu, sigma, dist, derive(seed, {t}));
    const std::vector<double> fx = apply_feature_map(map, x);
    const std::vector<double> fy = apply_feature_map(map, y);
    r.trial_values[t] = induced_kernel(fx, fy);
  });

  double mean = 0.0;
  for (double v : r.trial_values) mean += v;
  mean /= static_cast<double>(trials);
  double var = 0.0;
  for (double v : r.trial_values) {
    const double dlt = v - mean;
    var += dlt * dlt;
  }
  var /= static_cast<double>(trials - 1);

  r.sample_mean = mean;
  r.sample_variance = var;
  r.standard_error = std::sqrt(var / static_cast<double>(trials));
  r.z_score = r.standard_error > 0.0
                  ? std::abs(mean - r.exact_value) / r.standard_error
                  : (mean == r.exact_value ? 0.0 : std::numeric_limits<double>::infinity());
  r.bound_value = scheme == Scheme::Rgw ? rgw_variance_bound(dist, nu, sigma)
                                        : std::numeric_limits<double>::quiet_NaN();
  return r;
}

VarianceSweep run_variance_sweep(const Matrix& x, const Matrix& y, Scheme scheme,
                                 const std::vector<std::size_t>& nu_grid, double sigma,
                                 const DegreeDistribution& dist, std::size_t trials,
                                 std::uint64_t seed, const std::string& pair_id) {
  if (nu_grid.size() < 4) {
    throw InvalidRange("run_variance_sweep: nu grid needs at least 4 points");
  }
  for (std::size_t k = 1; k < nu_grid.size(); ++k) {
    if (nu_grid[k] <= nu_grid[k - 1]) {
      throw InvalidRange("run_variance_sweep: nu grid must be strictly ascending");
    }
  }
  VarianceSweep sweep;
  std::vector<double> variances;
  for (std::size_t k = 0; k < nu_grid.size(); ++k) {
    sweep.reports.push_back(run_bias_trial(x, y, scheme, nu_grid[k], sigma, dist, trials,
                                           derive(seed, {0x5EEDu, k}), pair_id));
    variances.push_back(sweep.reports.back().sample_variance);
  }
  sweep.slope = fit_loglog_slope(nu_grid, variances);
  return sweep;
}

std::vector<double> default_epsilon_grid() { return {0.01, 0.02, 0.05, 0.1, 0.2, 0.5}; }

ChebyshevTable chebyshev_curve(const EstimatorReport& report,
                               const std::vector<double>& epsilons) {
  if (report.trial_values.size() < 10000) {
    throw InsufficientTrials("chebyshev_curve: need at least 10^4 stored trial values");
  }
  if (epsilons.empty()) throw InvalidRange("chebyshev_curve: empty epsilon grid");
  ChebyshevTable t;
  t.epsilons = epsilons;
  const double m = static_cast<double>(report.trial_values.size());
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw InvalidRange("chebyshev_curve: epsilons must be positive");
    std::size_t exceed = 0;
    for (double v : report.trial_values) {
      if (std::abs(v - report.exact_value) >= eps) ++exceed;
    }
    const double p = static_cast<double>(exceed) / m;
    t.empirical_tail.push_back(p);
    t.measured_bound.push_back(std::min(1.0, report.sample_variance / (eps * eps)));
    t.analytic_bound.push_back(std::isfinite(report.bound_value)
                                   ? std::min(1.0, report.bound_value / (eps * eps))
                                   : std::numeric_limits<double>::quiet_NaN());
    t.binomial_se.push_back(std::sqrt(p * (1.0 - p) / m));
  }
  return t;
}

double fit_loglog_slope(const std::vector<std::size_t>& nu_grid,
                        const std::vector<double>& variances) {
  if (nu_grid.size() != variances.size() || nu_grid.size() < 2) {
    throw LengthMismatch("fit_loglog_slope: need two aligned grids of equal length >= 2");
  }
  const std::size_t n = nu_grid.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(variances[k] > 0.0)) {
      throw InvalidRange("fit_loglog_slope: variances must be positive");
    }
    const double lx = std::log(static_cast<double>(nu_grid[k]));
    const double ly = std::log(variances[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw InvalidRange("fit_loglog_slope: degenerate grid");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace logeuc
