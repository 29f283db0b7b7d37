#include "logeuc/spd_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "logeuc/errors.hpp"

namespace logeuc {

namespace {

constexpr std::size_t kMaxJacobiDim = 64;
constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += 2.0 * a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EigDecomposition jacobi_sym(const Matrix& a_in) {
  const std::size_t d = a_in.rows();
  if (d == 0 || a_in.cols() != d) {
    throw DimensionMismatch("jacobi_sym: input must be square and nonempty");
  }
  if (d > kMaxJacobiDim) {
    throw DimensionMismatch("jacobi_sym: dimension " + std::to_string(d) + " exceeds " +
                            std::to_string(kMaxJacobiDim));
  }
  if (!is_symmetric(a_in)) throw NotSymmetric("jacobi_sym: input is not symmetric");
  check_finite(a_in, "jacobi_sym");

  Matrix a = a_in;
  // Average away representational asymmetry so the rotations see an exactly
  // symmetric matrix.
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = m;
    }

  Matrix v = Matrix::identity(d);
  const double stop = 1e-12 * std::max(1.0, frobenius_norm(a));

  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) < stop) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        // Smaller-angle root of t^2 + 2t*theta - 1 = 0 for stability.
        const double t =
            (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          if (i == p || i == q) continue;
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = a(p, i) = aip - s * (aiq + tau * aip);
          a(i, q) = a(q, i) = aiq + s * (aip - tau * aiq);
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = vip - s * (viq + tau * vip);
          v(i, q) = viq + s * (vip - tau * viq);
        }
      }
    }
  }
  if (!converged && off_diagonal_norm(a) >= stop) {
    throw NotConverged("jacobi_sym: no convergence within " + std::to_string(kMaxSweeps) +
                       " sweeps");
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigDecomposition out;
  out.values.resize(d);
  out.vectors = Matrix(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < d; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

EigDecomposition eig_sym(const Matrix& m) {
  EigDecomposition e = jacobi_sym(m);
  for (double lambda : e.values) {
    if (lambda <= 1e-14) {
      throw NotPositiveDefinite("eig_sym: eigenvalue " + std::to_string(lambda) +
                                " below positivity threshold");
    }
  }
  return e;
}

bool is_spd(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!is_symmetric(m)) return false;
  EigDecomposition e = jacobi_sym(m);
  return e.values.back() > 1e-14;
}

void validate_spd(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionMismatch("validate_spd: matrix must be square and nonempty");
  }
  if (!is_symmetric(m)) throw NotSymmetric("validate_spd: not symmetric");
  EigDecomposition e = jacobi_sym(m);
  if (e.values.back() <= 1e-14) {
    throw NotPositiveDefinite("validate_spd: smallest eigenvalue " +
                              std::to_string(e.values.back()));
  }
}

Matrix matrix_log(const Matrix& m) {
  EigDecomposition e = eig_sym(m);
  const std::size_t d = m.rows();
  Matrix out(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    const double lk = std::log(e.values[k]);
    for (std::size_t i = 0; i < d; ++i) {
      const double uik = e.vectors(i, k);
      if (uik == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) out(i, j) += lk * uik * e.vectors(j, k);
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double s = 0.5 * (out(i, j) + out(j, i));
      out(i, j) = out(j, i) = s;
    }
  return out;
}

Matrix normalize_log(const Matrix& l) {
  const double norm = frobenius_norm(l);
  if (norm <= 1e-14) {
    throw ZeroLogMatrix("normalize_log: Frobenius norm " + std::to_string(norm) +
                        " (log of an identity-like matrix)");
  }
  return (1.0 / norm) * l;
}

Matrix covariance_descriptor(const Matrix& series, double ridge) {
  const std::size_t t = series.rows();
  const std::size_t f = series.cols();
  if (t < 2) throw DegenerateSeries("covariance_descriptor: need at least 2 rows");
  if (f < 1) throw DimensionMismatch("covariance_descriptor: need at least 1 column");
  if (ridge < 0.0) throw InvalidRange("covariance_descriptor: ridge must be nonnegative");

  std::vector<double> mean(f, 0.0);
  for (std::size_t r = 0; r < t; ++r)
    for (std::size_t c = 0; c < f; ++c) mean[c] += series(r, c);
  for (double& m : mean) m /= static_cast<double>(t);

  Matrix cov(f, f);
  std::vector<double> centered(f);
  for (std::size_t r = 0; r < t; ++r) {
    for (std::size_t c = 0; c < f; ++c) centered[c] = series(r, c) - mean[c];
    for (std::size_t i = 0; i < f; ++i) {
      const double ci = centered[i];
      if (ci == 0.0) continue;
      for (std::size_t j = i; j < f; ++j) cov(i, j) += ci * centered[j];
    }
  }
  const double scale = 1.0 / static_cast<double>(t - 1);
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = i; j < f; ++j) {
      const double v = cov(i, j) * scale;
      cov(i, j) = cov(j, i) = v;
    }
    cov(i, i) += ridge;
  }
  return cov;
}

}  // namespace logeuc
