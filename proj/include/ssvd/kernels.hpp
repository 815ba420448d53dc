#pragma once

#include <cstddef>

#include "ssvd/dense.hpp"
#include "ssvd/sparse.hpp"

// Dense and sparse products behind every pass of the decomposition pipelines.
//
// Accumulation order is part of the contract: every output entry is a sum
// started at 0.0 (or at the existing value for *_accumulate) with terms added
// in ascending inner index order. The OpenMP kernels in ssvd::kernels only
// split work across output entries, never across a single sum, so they are
// bit-identical to the straightforward loops in ssvd::kernels::serial for any
// thread count. Tests hold the two against each other.
namespace ssvd::kernels {

inline constexpr std::size_t kAllCols = static_cast<std::size_t>(-1);

/// A · B[:, 0:b_cols)
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b, std::size_t b_cols = kAllCols);
/// Aᵀ · B
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// C · B for a sparse chunk C.
DenseMatrix spmm(const SparseChunk& c, const DenseMatrix& b);
/// Cᵀ · B for a sparse chunk C.
DenseMatrix spmm_t(const SparseChunk& c, const DenseMatrix& b);

/// y += C[:, begin:end) · B, with B of shape (end - begin) x y.cols().
void spmm_accumulate(DenseMatrix& y, const SparseChunk& c, std::size_t begin, std::size_t end, const DenseMatrix& b);
/// out = C[:, begin:end)ᵀ · B; `out` must already be (end - begin) x b.cols().
void spmm_t_into(DenseMatrix& out, const SparseChunk& c, std::size_t begin, std::size_t end, const DenseMatrix& b);
/// Lower triangle of x += Wᵀ W (the upper triangle is left untouched).
void syrk_tn_accumulate(DenseMatrix& x, const DenseMatrix& w);

namespace serial {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b, std::size_t b_cols = kAllCols);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix spmm(const SparseChunk& c, const DenseMatrix& b);
DenseMatrix spmm_t(const SparseChunk& c, const DenseMatrix& b);
void spmm_accumulate(DenseMatrix& y, const SparseChunk& c, std::size_t begin, std::size_t end, const DenseMatrix& b);
void spmm_t_into(DenseMatrix& out, const SparseChunk& c, std::size_t begin, std::size_t end, const DenseMatrix& b);
void syrk_tn_accumulate(DenseMatrix& x, const DenseMatrix& w);

}  // namespace serial
}  // namespace ssvd::kernels
