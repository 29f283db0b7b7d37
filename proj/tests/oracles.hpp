#pragma once

#include <cstddef>
#include <vector>

#include "logeuc/matrix.hpp"

// Independent reference implementations the tests compare against. Each one
// deliberately avoids the code paths of the library routine it checks.
namespace logeuc::oracle {

/// Scaling-and-squaring Taylor series exponential.
Matrix matrix_exp(const Matrix& a);

/// Eigenvalues of a symmetric matrix via Faddeev-LeVerrier characteristic
/// polynomial coefficients and recursive bisection between critical points.
/// Assumes distinct eigenvalues (use random inputs); returns descending.
std::vector<double> charpoly_eigenvalues(const Matrix& a);

/// Plain two-pass covariance of series rows plus ridge on the diagonal.
Matrix covariance(const Matrix& series, double ridge);

/// coeff * <U1 kron ... kron Un, x kron ... kron x>_F with both Kronecker
/// powers fully materialized. n = factors.size(); n = 0 gives coeff.
double kron_feature(const std::vector<Matrix>& factors, const Matrix& x, double coeff);

/// Walsh-Hadamard transform through the explicit +-1 matrix, O(p^2).
std::vector<double> walsh_hadamard_dense(const std::vector<double>& v);

/// Gram of exp(-||xi - xj||_F^2 / (2 sigma^2)) by direct double loop.
Matrix gram_brute(const std::vector<Matrix>& batch, double sigma);

/// Hip-relative offsets by an index-at-a-time loop over frames and joints.
Matrix preprocess_loop(const Matrix& coords, std::size_t joints, std::size_t hip);

}  // namespace logeuc::oracle
