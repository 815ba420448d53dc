#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssvd/dense.hpp"
#include "ssvd/memory.hpp"

namespace ssvd {

template <typename T>
using SparseBuffer = std::vector<T, TrackingAllocator<T, MemoryKind::sparse>>;

/// A block of observation columns in compressed sparse column layout.
///
/// Invariants (checked by validate() and maintained by append_column):
/// col_ptr[0] == 0, nondecreasing, col_ptr.back() == nnz; row indices < rows
/// and strictly increasing within a column; values finite and nonzero.
class SparseChunk {
 public:
  SparseChunk() : col_ptr_(1, 0) {}
  explicit SparseChunk(std::size_t rows) : rows_(rows), col_ptr_(1, 0) {}
  /// Takes ownership of raw CSC arrays; throws DataError if they are invalid.
  SparseChunk(std::size_t rows, SparseBuffer<std::uint64_t> col_ptr, SparseBuffer<std::uint32_t> row_idx,
              SparseBuffer<double> values);

  /// Column-by-column copy of `m` with exact zeros dropped.
  static SparseChunk from_dense(const DenseMatrix& m);
  DenseMatrix to_dense() const;

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return col_ptr_.size() - 1; }
  std::size_t nnz() const noexcept { return values_.size(); }
  bool empty() const noexcept { return cols() == 0; }

  std::span<const std::uint64_t> col_ptr() const noexcept { return col_ptr_; }
  std::span<const std::uint32_t> row_idx() const noexcept { return row_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<const std::uint32_t> col_rows(std::size_t j) const noexcept {
    return {row_idx_.data() + col_ptr_[j], static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j])};
  }
  std::span<const double> col_values(std::size_t j) const noexcept {
    return {values_.data() + col_ptr_[j], static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j])};
  }

  /// Appends one column; throws DataError if the entries break an invariant.
  void append_column(std::span<const std::uint32_t> rows, std::span<const double> values);
  /// Columns [begin, end) as a new chunk.
  SparseChunk slice(std::size_t begin, std::size_t end) const;
  void reserve(std::size_t cols, std::size_t nnz);

  /// Bytes held by the three CSC arrays.
  std::size_t storage_bytes() const noexcept;
  void validate() const;

  friend bool operator==(const SparseChunk& a, const SparseChunk& b) noexcept {
    return a.rows_ == b.rows_ && a.col_ptr_ == b.col_ptr_ && a.row_idx_ == b.row_idx_ && a.values_ == b.values_;
  }

 private:
  std::size_t rows_ = 0;
  SparseBuffer<std::uint64_t> col_ptr_;
  SparseBuffer<std::uint32_t> row_idx_;
  SparseBuffer<double> values_;
};

}  // namespace ssvd
