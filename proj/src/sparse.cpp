#include "ssvd/sparse.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ssvd/errors.hpp"

namespace ssvd {

SparseChunk::SparseChunk(std::size_t rows, SparseBuffer<std::uint64_t> col_ptr, SparseBuffer<std::uint32_t> row_idx,
                         SparseBuffer<double> values)
    : rows_(rows), col_ptr_(std::move(col_ptr)), row_idx_(std::move(row_idx)), values_(std::move(values)) {
  validate();
}

void SparseChunk::validate() const {
  if (col_ptr_.empty() || col_ptr_.front() != 0) throw DataError("sparse chunk: col_ptr must start at 0");
  if (row_idx_.size() != values_.size()) throw DataError("sparse chunk: row_idx/values length mismatch");
  if (col_ptr_.back() != values_.size()) throw DataError("sparse chunk: col_ptr does not end at nnz");
  if (rows_ > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()))
    throw DataError("sparse chunk: row count must be below 2^31");
  for (std::size_t j = 0; j + 1 < col_ptr_.size(); ++j) {
    if (col_ptr_[j + 1] < col_ptr_[j]) throw DataError("sparse chunk: col_ptr decreases at column " + std::to_string(j));
    for (std::uint64_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      if (row_idx_[p] >= rows_) throw DataError("sparse chunk: row index out of range in column " + std::to_string(j));
      if (p > col_ptr_[j] && row_idx_[p] <= row_idx_[p - 1])
        throw DataError("sparse chunk: row indices not strictly increasing in column " + std::to_string(j));
      if (!std::isfinite(values_[p]) || values_[p] == 0.0)
        throw DataError("sparse chunk: zero or non-finite value in column " + std::to_string(j));
    }
  }
}

SparseChunk SparseChunk::from_dense(const DenseMatrix& m) {
  SparseChunk c(m.rows());
  std::vector<std::uint32_t> rows;
  std::vector<double> vals;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    rows.clear();
    vals.clear();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (m(i, j) != 0.0) {
        rows.push_back(static_cast<std::uint32_t>(i));
        vals.push_back(m(i, j));
      }
    }
    c.append_column(rows, vals);
  }
  return c;
}

DenseMatrix SparseChunk::to_dense() const {
  DenseMatrix d(rows_, cols());
  for (std::size_t j = 0; j < cols(); ++j) {
    auto r = col_rows(j);
    auto v = col_values(j);
    for (std::size_t p = 0; p < r.size(); ++p) d(r[p], j) = v[p];
  }
  return d;
}

void SparseChunk::append_column(std::span<const std::uint32_t> rows, std::span<const double> values) {
  if (rows.size() != values.size()) throw DataError("append_column: rows/values length mismatch");
  for (std::size_t p = 0; p < rows.size(); ++p) {
    if (rows[p] >= rows_) throw DataError("append_column: row index out of range");
    if (p > 0 && rows[p] <= rows[p - 1]) throw DataError("append_column: row indices not strictly increasing");
    if (!std::isfinite(values[p]) || values[p] == 0.0) throw DataError("append_column: zero or non-finite value");
  }
  row_idx_.insert(row_idx_.end(), rows.begin(), rows.end());
  values_.insert(values_.end(), values.begin(), values.end());
  col_ptr_.push_back(values_.size());
}

SparseChunk SparseChunk::slice(std::size_t begin, std::size_t end) const {
  SSVD_REQUIRE(begin <= end && end <= cols(), "slice: column range out of bounds");
  SparseChunk out(rows_);
  const std::uint64_t lo = col_ptr_[begin];
  const std::uint64_t hi = col_ptr_[end];
  out.col_ptr_.resize(end - begin + 1);
  for (std::size_t j = begin; j <= end; ++j) out.col_ptr_[j - begin] = col_ptr_[j] - lo;
  out.row_idx_.assign(row_idx_.begin() + lo, row_idx_.begin() + hi);
  out.values_.assign(values_.begin() + lo, values_.begin() + hi);
  return out;
}

void SparseChunk::reserve(std::size_t cols, std::size_t nnz) {
  col_ptr_.reserve(cols + 1);
  row_idx_.reserve(nnz);
  values_.reserve(nnz);
}

std::size_t SparseChunk::storage_bytes() const noexcept {
  return col_ptr_.capacity() * sizeof(std::uint64_t) + row_idx_.capacity() * sizeof(std::uint32_t) +
         values_.capacity() * sizeof(double);
}

}  // namespace ssvd
