#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ssvd/memory.hpp"

namespace ssvd {

using DenseBuffer = std::vector<double, TrackingAllocator<double, MemoryKind::dense>>;

/// Column-major dense matrix of doubles. Value semantics; zero-initialised.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);

  static DenseMatrix identity(std::size_t n);
  /// Builds from row-major nested lists; convenient for small fixtures.
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[j * rows_ + i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> col(std::size_t j) noexcept { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const noexcept { return {data_.data() + j * rows_, rows_}; }

  /// Copy of the leading `count` columns.
  DenseMatrix leading_cols(std::size_t count) const;
  DenseMatrix transposed() const;
  /// Max abs entry; 0 for an empty matrix.
  double max_abs() const noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) noexcept {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  DenseBuffer data_;
};

/// Symmetric matrix in full storage. Mutation goes through set(), which
/// writes both triangles, so X(i,j) == X(j,i) exactly.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t dim) : full_(dim, dim) {}
  /// Symmetrises `m` as (m + mᵀ)/2.
  static SymmetricMatrix from_dense(const DenseMatrix& m);
  /// Copies the lower triangle of `m` into both triangles.
  static SymmetricMatrix from_lower(const DenseMatrix& m);

  std::size_t dim() const noexcept { return full_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return full_(i, j); }
  void set(std::size_t i, std::size_t j, double v) noexcept {
    full_(i, j) = v;
    full_(j, i) = v;
  }
  const DenseMatrix& full() const noexcept { return full_; }

 private:
  DenseMatrix full_;
};

/// Nonincreasing, nonnegative values (singular values or clamped eigenvalues).
class Spectrum {
 public:
  Spectrum() = default;
  /// Throws ContractError unless `values` is nonincreasing and nonnegative.
  explicit Spectrum(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }

  Spectrum truncated(std::size_t count) const;
  /// First `count` values, zero-filled past the end.
  std::vector<double> padded(std::size_t count) const;

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::vector<double> values_;
};

/// Flips each column so that its largest-magnitude entry is positive
/// (first such entry on ties).
void normalize_column_signs(DenseMatrix& m) noexcept;

}  // namespace ssvd
