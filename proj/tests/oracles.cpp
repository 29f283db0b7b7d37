#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace logeuc::oracle {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      for (std::size_t k = 0; k < b.rows(); ++k) {
        for (std::size_t l = 0; l < b.cols(); ++l) {
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
        }
      }
    }
  }
  return out;
}

double poly_eval(const std::vector<double>& coeffs, double x) {
  double v = 0.0;
  for (double c : coeffs) v = v * x + c;
  return v;
}

std::vector<double> poly_derivative(const std::vector<double>& coeffs) {
  const std::size_t deg = coeffs.size() - 1;
  std::vector<double> out;
  for (std::size_t i = 0; i < deg; ++i) {
    out.push_back(coeffs[i] * static_cast<double>(deg - i));
  }
  return out;
}

double bisect(const std::vector<double>& coeffs, double lo, double hi) {
  double flo = poly_eval(coeffs, lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = poly_eval(coeffs, mid);
    if ((flo <= 0.0) == (fmid <= 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// All real roots in [lo, hi] assuming simple roots: recurse on the
// derivative's roots to split the interval into monotone pieces.
std::vector<double> poly_roots(const std::vector<double>& coeffs, double lo, double hi) {
  if (coeffs.size() == 2) {
    const double r = -coeffs[1] / coeffs[0];
    if (r >= lo && r <= hi) return {r};
    return {};
  }
  std::vector<double> cuts = {lo};
  for (double c : poly_roots(poly_derivative(coeffs), lo, hi)) cuts.push_back(c);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double fa = poly_eval(coeffs, cuts[i]);
    const double fb = poly_eval(coeffs, cuts[i + 1]);
    if ((fa <= 0.0) != (fb <= 0.0)) {
      roots.push_back(bisect(coeffs, cuts[i], cuts[i + 1]));
    }
  }
  return roots;
}

}  // namespace

Matrix matrix_exp(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix_exp: square input required");
  double norm = frobenius_norm(a);
  int squarings = 0;
  while (norm > 0.25) {
    norm *= 0.5;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  Matrix s = scale * a;
  Matrix term = Matrix::identity(a.rows());
  Matrix sum = term;
  for (int k = 1; k <= 40; ++k) {
    term = (1.0 / k) * (term * s);
    sum = sum + term;
    if (frobenius_norm(term) < 1e-300) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

std::vector<double> charpoly_eigenvalues(const Matrix& a) {
  const std::size_t d = a.rows();
  // Faddeev-LeVerrier: M_1 = A, c_1 = -tr M_1, M_{k+1} = A (M_k + c_k I).
  // coeffs holds the monic characteristic polynomial, highest degree first.
  std::vector<double> coeffs = {1.0};
  Matrix m = a;
  for (std::size_t k = 1; k <= d; ++k) {
    double tr = 0.0;
    for (std::size_t i = 0; i < d; ++i) tr += m(i, i);
    const double c = -tr / static_cast<double>(k);
    coeffs.push_back(c);
    if (k < d) m = a * (m + c * Matrix::identity(d));
  }
  double radius = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < d; ++j) row += std::abs(a(i, j));
    radius = std::max(radius, row);
  }
  std::vector<double> roots = poly_roots(coeffs, -radius - 1.0, radius + 1.0);
  std::sort(roots.begin(), roots.end(), std::greater<double>());
  return roots;
}

Matrix covariance(const Matrix& series, double ridge) {
  const std::size_t t = series.rows();
  const std::size_t f = series.cols();
  std::vector<double> mean(f, 0.0);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < f; ++j) mean[j] += series(i, j);
  }
  for (double& m : mean) m /= static_cast<double>(t);
  Matrix cov(f, f);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t p = 0; p < f; ++p) {
      for (std::size_t q = 0; q < f; ++q) {
        cov(p, q) += (series(i, p) - mean[p]) * (series(i, q) - mean[q]);
      }
    }
  }
  for (std::size_t p = 0; p < f; ++p) {
    for (std::size_t q = 0; q < f; ++q) cov(p, q) /= static_cast<double>(t - 1);
    cov(p, p) += ridge;
  }
  return cov;
}

double kron_feature(const std::vector<Matrix>& factors, const Matrix& x, double coeff) {
  if (factors.empty()) return coeff;
  Matrix w = factors[0];
  Matrix xp = x;
  for (std::size_t i = 1; i < factors.size(); ++i) {
    w = kron(w, factors[i]);
    xp = kron(xp, x);
  }
  return coeff * frobenius_dot(w, xp);
}

std::vector<double> walsh_hadamard_dense(const std::vector<double>& v) {
  const std::size_t p = v.size();
  std::vector<std::vector<int>> h = {{1}};
  std::size_t size = 1;
  while (size < p) {
    std::vector<std::vector<int>> next(2 * size, std::vector<int>(2 * size));
    for (std::size_t i = 0; i < size; ++i) {
      for (std::size_t j = 0; j < size; ++j) {
        next[i][j] = h[i][j];
        next[i][j + size] = h[i][j];
        next[i + size][j] = h[i][j];
        next[i + size][j + size] = -h[i][j];
      }
    }
    h = std::move(next);
    size *= 2;
  }
  if (size != p) throw std::invalid_argument("walsh_hadamard_dense: length not a power of two");
  std::vector<double> out(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) out[i] += h[i][j] * v[j];
  }
  return out;
}

Matrix gram_brute(const std::vector<Matrix>& batch, double sigma) {
  const std::size_t n = batch.size();
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dist2 = 0.0;
      for (std::size_t k = 0; k < batch[i].size(); ++k) {
        const double diff = batch[i].data()[k] - batch[j].data()[k];
        dist2 += diff * diff;
      }
      g(i, j) = std::exp(-dist2 / (2.0 * sigma * sigma));
    }
  }
  return g;
}

Matrix preprocess_loop(const Matrix& coords, std::size_t joints, std::size_t hip) {
  const std::size_t t = coords.rows();
  Matrix out(t, 3 * (joints - 1));
  for (std::size_t frame = 0; frame < t; ++frame) {
    std::size_t col = 0;
    for (std::size_t j = 0; j < joints; ++j) {
      if (j == hip) continue;
      for (std::size_t axis = 0; axis < 3; ++axis) {
        out(frame, col++) = coords(frame, 3 * j + axis) - coords(frame, 3 * hip + axis);
      }
    }
  }
  return out;
}

}  // namespace logeuc::oracle
