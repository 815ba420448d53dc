#pragma once

#include <cstddef>
#include <vector>

#include "ssvd/dense.hpp"

namespace ssvd {

/// Relative threshold below which a column residual counts as dependent.
inline constexpr double kRankTolerance = 1e-12;

/// Orthonormal basis for the column span of `y`.
///
/// Householder QR that walks the columns in order and skips any column whose
/// residual after projecting out the already accepted columns has norm at or
/// below kRankTolerance times the largest column norm of `y`. The result has
/// r = numerical rank columns, each oriented so that its inner product with the
/// generating column of `y` is positive. An all-zero (or empty) `y` yields an
/// m x 0 matrix. Takes `y` by value and reuses its storage as the workspace.
DenseMatrix orthonormalize(DenseMatrix y);

struct SymmetricEigen {
  /// Eigenvalues in descending order. May be slightly negative for PSD input.
  std::vector<double> values;
  /// Orthonormal eigenvectors as columns, matching `values`. Each column's
  /// largest-magnitude entry is positive.
  DenseMatrix vectors;
};

/// Cyclic Jacobi eigensolver; sweeps until the off-diagonal Frobenius norm is
/// at most 1e-14 times the Frobenius norm of `x`. Throws DataError on
/// non-finite input.
SymmetricEigen sym_eigh(const SymmetricMatrix& x);

}  // namespace ssvd
