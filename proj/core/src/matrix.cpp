#include "milattn/matrix.hpp"

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "milattn/error.hpp"
#include "milattn/rng.hpp"

namespace milattn {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ConfigError("matrix data length " + std::to_string(data_.size()) + " != " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ConfigError("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

bool Matrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Matrix::fill(double v) noexcept {
  for (double& x : data_) x = v;
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const Matrix& m) {
  return {m.values().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

Eigen::Map<RowMajor> view(Matrix& m) {
  return {m.values().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ConfigError("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  if (!out.empty() && a.cols() > 0) view(out).noalias() = view(a) * view(b);
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ConfigError("matmul_nt: inner dimensions differ");
  Matrix out(a.rows(), b.rows());
  if (!out.empty() && a.cols() > 0) view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ConfigError("matmul_tn: inner dimensions differ");
  Matrix out(a.cols(), b.cols());
  if (!out.empty() && a.rows() > 0) view(out).noalias() = view(a).transpose() * view(b);
  return out;
}

Matrix affine_rows(const Matrix& x, const Matrix& w, std::span<const double> bias) {
  if (x.cols() != w.cols()) throw ConfigError("affine_rows: inner dimensions differ");
  if (!bias.empty() && bias.size() != w.rows()) throw ConfigError("affine_rows: bias length differs");
  const std::size_t n = x.rows(), k = x.cols(), m = w.rows();
  const Matrix wt = transpose(w);
  Matrix out(n, m);
  for (std::size_t r = 0; r < n; ++r) {
    double* __restrict o = out.row(r).data();
    const double* xr = x.row(r).data();
    for (std::size_t c = 0; c < m; ++c) o[c] = bias.empty() ? 0.0 : bias[c];
    for (std::size_t j = 0; j < k; ++j) {
      const double xv = xr[j];
      const double* __restrict wr = wt.row(j).data();
      for (std::size_t c = 0; c < m; ++c) o[c] += xv * wr[c];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix stack_rows(std::span<const std::vector<double>> rows) {
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw ConfigError("stack_rows: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(rows.size(), cols, std::move(data));
}

double standard_normal(Rng& rng) {
  double u, v, s;
  do {
    u = 2.0 * uniform01(rng) - 1.0;
    v = 2.0 * uniform01(rng) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  // Only one of the pair is used so every call consumes an independent draw.
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

}  // namespace milattn
