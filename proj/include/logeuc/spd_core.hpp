#pragma once

#include <vector>

#include "logeuc/matrix.hpp"

namespace logeuc {

/// Eigendecomposition of a symmetric matrix. eigenvalues are sorted
/// descending; eigenvectors holds the matching eigenvectors as columns, so
/// input = U diag(values) U^T.
struct EigDecomposition {
  std::vector<double> values;
  Matrix vectors;
};

/// Cyclic Jacobi eigensolver for symmetric matrices, d <= 64. Stops when the
/// off-diagonal Frobenius norm drops below 1e-12 relative to max(1, ||A||_F);
/// throws NotConverged after 100 sweeps. No positivity requirement.
EigDecomposition jacobi_sym(const Matrix& a);

/// jacobi_sym plus an SPD check: throws NotPositiveDefinite if any eigenvalue
/// is <= 1e-14.
EigDecomposition eig_sym(const Matrix& m);

/// True iff m is symmetric with smallest eigenvalue > 1e-14.
bool is_spd(const Matrix& m);

/// Throws NotSymmetric / NotPositiveDefinite instead of returning false.
void validate_spd(const Matrix& m);

/// Principal matrix logarithm U diag(log lambda) U^T. Input must be SPD.
Matrix matrix_log(const Matrix& m);

/// l / ||l||_F. Throws ZeroLogMatrix when ||l||_F <= 1e-14 (the log of the
/// identity), which callers must reject or regularize.
Matrix normalize_log(const Matrix& l);

/// Unbiased sample covariance of the rows of series (T x F, T >= 2) plus
/// ridge * I. Throws DegenerateSeries when T < 2.
Matrix covariance_descriptor(const Matrix& series, double ridge);

}  // namespace logeuc
