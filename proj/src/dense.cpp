#include "ssvd/dense.hpp"

#include <algorithm>
#include <cmath>

#include "ssvd/errors.hpp"

namespace ssvd {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  DenseMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    SSVD_REQUIRE(rows[i].size() == c, "from_rows: ragged input");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

DenseMatrix DenseMatrix::leading_cols(std::size_t count) const {
  SSVD_REQUIRE(count <= cols_, "leading_cols: count exceeds column count");
  DenseMatrix out(rows_, count);
  std::copy_n(data_.begin(), rows_ * count, out.data_.begin());
  return out;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  return t;
}

double DenseMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool DenseMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

SymmetricMatrix SymmetricMatrix::from_dense(const DenseMatrix& m) {
  SSVD_REQUIRE(m.rows() == m.cols(), "SymmetricMatrix: input is not square");
  SymmetricMatrix s(m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = j; i < m.rows(); ++i) s.set(i, j, 0.5 * (m(i, j) + m(j, i)));
  return s;
}

SymmetricMatrix SymmetricMatrix::from_lower(const DenseMatrix& m) {
  SSVD_REQUIRE(m.rows() == m.cols(), "SymmetricMatrix: input is not square");
  SymmetricMatrix s(m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = j; i < m.rows(); ++i) s.set(i, j, m(i, j));
  return s;
}

Spectrum::Spectrum(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    SSVD_REQUIRE(values_[i] >= 0.0, "Spectrum: negative value");
    SSVD_REQUIRE(i == 0 || values_[i] <= values_[i - 1], "Spectrum: values not descending");
  }
}

Spectrum Spectrum::truncated(std::size_t count) const {
  return Spectrum(std::vector<double>(values_.begin(), values_.begin() + std::min(count, values_.size())));
}

std::vector<double> Spectrum::padded(std::size_t count) const {
  std::vector<double> out(count, 0.0);
  std::copy_n(values_.begin(), std::min(count, values_.size()), out.begin());
  return out;
}

void normalize_column_signs(DenseMatrix& m) noexcept {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    auto c = m.col(j);
    std::size_t best = 0;
    for (std::size_t i = 1; i < c.size(); ++i)
      if (std::abs(c[i]) > std::abs(c[best])) best = i;
    if (!c.empty() && c[best] < 0.0)
      for (double& v : c) v = -v;
  }
}

}  // namespace ssvd
