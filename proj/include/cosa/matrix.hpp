#ifndef COSA_MATRIX_HPP
#define COSA_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace cosa {

/// Dense row-major matrix of 64-bit floats. All operations on it are pure
/// and use a fixed summation order, so identical inputs give bit-identical
/// outputs across runs and thread counts.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool all_finite() const;
  bool is_zero() const;

  friend bool operator==(const Matrix& x, const Matrix& y) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Exact product with row-major, k-innermost summation order.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double factor);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);

}  // namespace cosa

#endif
