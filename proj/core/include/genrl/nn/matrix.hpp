#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace genrl::nn {

/// Dense row-major matrix of doubles. Vectors are 1 x n rows.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);

  static Matrix row(std::span<const double> values);
  static Matrix column(std::span<const double> values);
  static Matrix identity(std::size_t n);

  std::size_t size() const noexcept { return data.size(); }
  bool same_shape(const Matrix& o) const noexcept { return rows == o.rows && cols == o.cols; }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row_span(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row_span(std::size_t r) const { return {data.data() + r * cols, cols}; }

  void fill(double v);
  bool all_finite() const noexcept;

  bool operator==(const Matrix&) const = default;
};

/// out += a * b (shapes checked by the caller).
void gemm_accumulate(const Matrix& a, const Matrix& b, Matrix& out);
/// out += a^T * b
void gemm_at_b_accumulate(const Matrix& a, const Matrix& b, Matrix& out);
/// out += a * b^T
void gemm_a_bt_accumulate(const Matrix& a, const Matrix& b, Matrix& out);

}  // namespace genrl::nn
