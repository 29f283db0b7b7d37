#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logeuc/matrix.hpp"

namespace logeuc {

/// Provenance tag for a Gram matrix: either the exact kernel at bandwidth
/// sigma, or the dot-product Gram of explicit features from a sampled map.
struct GramSource {
  enum class Kind { Exact, Induced };
  Kind kind = Kind::Exact;
  double sigma = 1.0;       // Exact
  std::string scheme;       // Induced
  std::size_t nu = 0;       // Induced
  std::uint64_t seed = 0;   // Induced
};

struct GramMatrix {
  std::size_t n = 0;
  Matrix entries;
  GramSource source;
};

/// exp(-||x - y||_F^2 / (2 sigma^2)) for unit-Frobenius-norm symmetric log
/// descriptors; equals 1 exactly when x and y are the same object.
double log_euclidean_kernel(const Matrix& x, const Matrix& y, double sigma);

/// Same kernel through the algebraic reduction exp((<x,y>_F - 1)/sigma^2),
/// valid only under unit norms. Kept as an independent cross-check and as
/// the cheap path for Gram assembly.
double log_euclidean_kernel_dot_form(const Matrix& x, const Matrix& y, double sigma);

/// n x n matrix of pairwise Frobenius inner products of the batch. This is
/// the only quadratic-cost pass needed for exact Grams at any number of
/// bandwidths: gram_from_dots turns it into a Gram per sigma in O(n^2).
Matrix pairwise_frobenius_dots(const std::vector<Matrix>& batch);

/// Entrywise exp((dots - 1)/sigma^2) with the diagonal pinned to exactly 1.
GramMatrix gram_from_dots(const Matrix& dots, double sigma);

/// Exact kernel Gram of a batch of unit-norm log descriptors. Cost is one
/// pairwise d^2-dot pass plus an entrywise map.
GramMatrix exact_gram(const std::vector<Matrix>& batch, double sigma);

/// features is n x nu (rows are feature vectors); returns F F^T, PSD by
/// construction. Source metadata is attached verbatim.
GramMatrix induced_gram(const Matrix& features, const GramSource& source);

/// Submatrix of a Gram at the given row/column indices.
Matrix gram_submatrix(const Matrix& gram, const std::vector<std::size_t>& rows,
                      const std::vector<std::size_t>& cols);

}  // namespace logeuc
