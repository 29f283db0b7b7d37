#pragma once

#include <cstddef>
#include <vector>

#include "logeuc/errors.hpp"

namespace logeuc {

/// Dense row-major matrix of doubles. Element (i,j) lives at data[i*cols + j],
/// so row traversals are contiguous and inner products over vec(X) reduce to a
/// straight scan of the buffer.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

Matrix transpose(const Matrix& a);

/// <A,B>_F = sum_ij A_ij B_ij. Both operands must share shape.
double frobenius_dot(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a);

/// Max |A_ij - A_ji| <= tol * max(1, ||A||_F). Square matrices only.
bool is_symmetric(const Matrix& a, double tol = 1e-10);

/// Throws NonFinite if any entry is NaN or infinite.
void check_finite(const Matrix& a, const char* what);

}  // namespace logeuc
