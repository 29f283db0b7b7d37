#include "logeuc/kernels.hpp"

#include <cmath>
#include <string>

#include "logeuc/errors.hpp"
#include "logeuc/parallel.hpp"

namespace logeuc {

namespace {

void require_unit_log(const Matrix& x, const char* what) {
  if (x.rows() != x.cols() || x.rows() == 0) {
    throw DimensionMismatch(std::string(what) + ": descriptor must be square");
  }
  const double norm = frobenius_norm(x);
  if (std::abs(norm - 1.0) > 1e-6) {
    throw NormViolation(std::string(what) + ": descriptor norm " + std::to_string(norm) +
                        " is not 1");
  }
}

void require_sigma(double sigma, const char* what) {
  if (!(sigma > 0.0)) throw InvalidRange(std::string(what) + ": sigma must be positive");
}

}  // namespace

double log_euclidean_kernel(const Matrix& x, const Matrix& y, double sigma) {
  require_unit_log(x, "log_euclidean_kernel");
  require_unit_log(y, "log_euclidean_kernel");
  require_sigma(sigma, "log_euclidean_kernel");
  if (x.rows() != y.rows()) {
    throw DimensionMismatch("log_euclidean_kernel: descriptor dimensions differ");
  }
  double dist_sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = x.data()[k] - y.data()[k];
    dist_sq += diff * diff;
  }
  return std::exp(-dist_sq / (2.0 * sigma * sigma));
}

double log_euclidean_kernel_dot_form(const Matrix& x, const Matrix& y, double sigma) {
  require_unit_log(x, "log_euclidean_kernel_dot_form");
  require_unit_log(y, "log_euclidean_kernel_dot_form");
  require_sigma(sigma, "log_euclidean_kernel_dot_form");
  return std::exp((frobenius_dot(x, y) - 1.0) / (sigma * sigma));
}

Matrix pairwise_frobenius_dots(const std::vector<Matrix>& batch) {
  const std::size_t n = batch.size();
  for (std::size_t i = 0; i < n; ++i) {
    try {
      require_unit_log(batch[i], "pairwise_frobenius_dots");
    } catch (const Error& e) {
      throw NormViolation("pairwise_frobenius_dots: item " + std::to_string(i) + ": " + e.what());
    }
  }
  Matrix dots(n, n);
  parallel_for(0, n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) dots(i, j) = frobenius_dot(batch[i], batch[j]);
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) dots(i, j) = dots(j, i);
  return dots;
}

GramMatrix gram_from_dots(const Matrix& dots, double sigma) {
  require_sigma(sigma, "gram_from_dots");
  if (dots.rows() != dots.cols()) throw DimensionMismatch("gram_from_dots: square input required");
  const std::size_t n = dots.rows();
  GramMatrix g;
  g.n = n;
  g.entries = Matrix(n, n);
  g.source.kind = GramSource::Kind::Exact;
  g.source.sigma = sigma;
  const double inv_sigma_sq = 1.0 / (sigma * sigma);
  for (std::size_t i = 0; i < n; ++i) {
    g.entries(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::exp((dots(i, j) - 1.0) * inv_sigma_sq);
      g.entries(i, j) = g.entries(j, i) = v;
    }
  }
  return g;
}

GramMatrix exact_gram(const std::vector<Matrix>& batch, double sigma) {
  return gram_from_dots(pairwise_frobenius_dots(batch), sigma);
}

GramMatrix induced_gram(const Matrix& features, const GramSource& source) {
  const std::size_t n = features.rows();
  const std::size_t nu = features.cols();
  if (nu == 0) throw LengthMismatch("induced_gram: zero-length feature rows");
  GramMatrix g;
  g.n = n;
  g.entries = Matrix(n, n);
  g.source = source;
  g.source.kind = GramSource::Kind::Induced;
  parallel_for(0, n, [&](std::size_t i) {
    const double* fi = features.data() + i * nu;
    for (std::size_t j = i; j < n; ++j) {
      const double* fj = features.data() + j * nu;
      double s = 0.0;
      for (std::size_t k = 0; k < nu; ++k) s += fi[k] * fj[k];
      g.entries(i, j) = s;
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) g.entries(i, j) = g.entries(j, i);
  return g;
}

Matrix gram_submatrix(const Matrix& gram, const std::vector<std::size_t>& rows,
                      const std::vector<std::size_t>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= gram.rows()) throw IndexOutOfRange("gram_submatrix: row index out of range");
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j] >= gram.cols()) throw IndexOutOfRange("gram_submatrix: col index out of range");
      out(i, j) = gram(rows[i], cols[j]);
    }
  }
  return out;
}

}  // namespace logeuc
