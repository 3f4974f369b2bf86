#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ensfts {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix from_columns(const std::vector<std::vector<double>>& columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;

  std::span<const double> entries() const { return data_; }
  std::span<double> entries() { return data_; }

  // Copies rows [first, first + count).
  Matrix row_block(std::size_t first, std::size_t count) const;
  Matrix select_rows(std::span<const std::size_t> indices) const;
  Matrix select_columns(std::span<const std::size_t> indices) const;

  Matrix transpose() const;
  bool all_finite() const;
  bool is_symmetric(double tol) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
std::vector<double> operator*(const Matrix& a, std::span<const double> x);

double frobenius_norm(const Matrix& m);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace ensfts
