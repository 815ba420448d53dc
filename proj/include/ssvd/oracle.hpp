#pragma once

#include <cstddef>

#include "ssvd/decomposition.hpp"
#include "ssvd/dense.hpp"
#include "ssvd/stream.hpp"

namespace ssvd {

/// Largest feature count the brute-force oracle accepts.
inline constexpr std::size_t kOracleMaxRows = 2000;

/// Reference decomposition: forms A Aᵀ from one pass of sparse outer products,
/// runs sym_eigh and returns the top-k pairs (U, sqrt(λ)), negative
/// eigenvalues clamped to zero. Zero singular values are kept, so S always
/// has k entries. Throws ConfigError for rows > kOracleMaxRows and
/// ContractError for k outside [1, rows].
Decomposition oracle_decompose(ChunkStream& stream, std::size_t k);
Decomposition oracle_decompose(const DenseMatrix& a, std::size_t k);

}  // namespace ssvd
