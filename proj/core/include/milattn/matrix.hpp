#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace milattn {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool all_finite() const noexcept;
  void fill(double v) noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a (n x k) * b (k x m)
Matrix matmul(const Matrix& a, const Matrix& b);
// a (n x k) * b^T, b is (m x k)
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// a^T * b, a is (k x n), b is (k x m)
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// x (n x k) * w^T + bias, w is (m x k); an empty bias means zero. Every
// output row goes through the same fixed-order loop, so permuting the rows
// of x permutes the result exactly.
Matrix affine_rows(const Matrix& x, const Matrix& w, std::span<const double> bias = {});

Matrix transpose(const Matrix& a);

// Stacks the given rows into a matrix. All rows must have the same length.
Matrix stack_rows(std::span<const std::vector<double>> rows);

}  // namespace milattn
