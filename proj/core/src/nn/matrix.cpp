#include "genrl/nn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "genrl/errors.hpp"

namespace genrl::nn {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != rows * cols) {
    throw ShapeError("matrix: " + std::to_string(data.size()) + " values for " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::row(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) { std::fill(data.begin(), data.end(), v); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Matrix& m) { return ConstMap(m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)); }
MutMap view(Matrix& m) { return MutMap(m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)); }

}  // namespace

void gemm_accumulate(const Matrix& a, const Matrix& b, Matrix& out) { view(out).noalias() += view(a) * view(b); }

void gemm_at_b_accumulate(const Matrix& a, const Matrix& b, Matrix& out) {
  view(out).noalias() += view(a).transpose() * view(b);
}

void gemm_a_bt_accumulate(const Matrix& a, const Matrix& b, Matrix& out) {
  view(out).noalias() += view(a) * view(b).transpose();
}

}  // namespace genrl::nn
