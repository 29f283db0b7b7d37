#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logeuc/feature_maps.hpp"
#include "logeuc/matrix.hpp"

namespace logeuc {

/// Truncated and closed-form evaluations of C_rho = sum_n 1/(rho(n) n!) for
/// the raw geometric law rho(n) = theta (1-theta)^n. The closed form is
/// (1/theta) exp(1/(1-theta)); the bare exponential is sometimes quoted with
/// the 1/theta prefactor absorbed into a proportionality constant.
struct CrhoValue {
  double theta = 0.0;
  double truncated_sum = 0.0;
  double closed_form = 0.0;
  double relative_gap = 0.0;  // (closed_form - truncated_sum) / closed_form
};

CrhoValue compute_c_rho(const DegreeDistribution& dist);

/// Variance bound attached to RGW reports:
///   C_rho / nu^3 * exp((3 - 2 sigma^2) / sigma^4).
/// Reported, never asserted: a sum of nu independent unbiased components has
/// variance Theta(1/nu), so the measured log-log slope is the ground truth
/// and the lab prints it next to both the -3 and -1 reference rates.
double rgw_variance_bound(const DegreeDistribution& dist, std::size_t nu, double sigma);

struct EstimatorReport {
  std::string pair_id;
  Scheme scheme = Scheme::Rgw;
  std::size_t nu = 0;
  std::size_t trials = 0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;  // unbiased, M-1 denominator
  double standard_error = 0.0;   // sqrt(variance / M)
  double exact_value = 0.0;      // K(x, y)
  double z_score = 0.0;          // |mean - exact| / SE
  double bound_value = 0.0;      // RGW only; NaN for the baselines
  std::vector<double> trial_values;
};

/// Draws `trials` independent maps (per-trial substreams of seed), applies
/// each to x and y, and summarizes the induced kernel values against the
/// exact kernel. trials >= 1000 required.
EstimatorReport run_bias_trial(const Matrix& x, const Matrix& y, Scheme scheme, std::size_t nu,
                               double sigma, const DegreeDistribution& dist, std::size_t trials,
                               std::uint64_t seed, const std::string& pair_id = "pair");

struct VarianceSweep {
  std::vector<EstimatorReport> reports;  // one per grid point
  double slope = 0.0;                    // least-squares log(var) vs log(nu)
};

/// nu_grid must be strictly ascending with at least 4 points.
VarianceSweep run_variance_sweep(const Matrix& x, const Matrix& y, Scheme scheme,
                                 const std::vector<std::size_t>& nu_grid, double sigma,
                                 const DegreeDistribution& dist, std::size_t trials,
                                 std::uint64_t seed, const std::string& pair_id = "pair");

struct ChebyshevTable {
  std::vector<double> epsilons;
  std::vector<double> empirical_tail;  // fraction of |value - exact| >= eps
  std::vector<double> measured_bound;  // min(1, sample_variance / eps^2)
  std::vector<double> analytic_bound;  // min(1, bound_value / eps^2); NaN without a bound
  std::vector<double> binomial_se;     // sqrt(p(1-p)/M) at the empirical p
};

std::vector<double> default_epsilon_grid();

/// Tail table from a stored report; needs at least 10^4 trial values.
ChebyshevTable chebyshev_curve(const EstimatorReport& report,
                               const std::vector<double>& epsilons = default_epsilon_grid());

/// Least-squares slope of log(variance) against log(nu).
double fit_loglog_slope(const std::vector<std::size_t>& nu_grid,
                        const std::vector<double>& variances);

}  // namespace logeuc
