#pragma once

#include <cstddef>
#include <cstdint>

#include "ssvd/decomposition.hpp"
#include "ssvd/dense.hpp"
#include "ssvd/sparse.hpp"
#include "ssvd/stream.hpp"

// Streamed two-pass stochastic decomposition (plus q power-iteration passes).
//
//   Y = sum_i C_i O_i                    one pass
//   Y <- sum_i C_i (C_iᵀ Y), q times     q passes
//   Q = orth(Y)                          in core
//   X = sum_i (QᵀC_i)(QᵀC_i)ᵀ             one pass
//   (λ, V) = eigh(X); S = sqrt(λ)[:k]; U = (Q V)[:, :k]
//
// Each pass walks a chunk in column tiles of at most `rows` columns, so the
// dense working set never exceeds 3 * rows * (k+l) + (k+l)^2 values and no
// O(n) or O(rows^2) matrix is formed.
namespace ssvd {

/// Per-chunk seed of the block O_i.
std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk_index) noexcept;

// Chunk-level building blocks, shared with the in-core stochastic decomposer.

/// y += C · O where O = gaussian_matrix(C.cols(), y.cols(), block_seed).
void accumulate_sample(DenseMatrix& y, const SparseChunk& c, std::uint64_t block_seed);
/// y += C · O where row j of O is keyed by mix_seed(seed, key(first_column + j)).
void accumulate_sample_per_column(DenseMatrix& y, const SparseChunk& c, std::uint64_t seed, std::uint64_t first_column,
                                  const ColumnKey& key);
/// out += C (Cᵀ y)
void accumulate_power(DenseMatrix& out, const SparseChunk& c, const DenseMatrix& y);
/// Lower triangle of x += (QᵀC)(QᵀC)ᵀ
void accumulate_covariance(DenseMatrix& x, const SparseChunk& c, const DenseMatrix& q);

/// Sample matrix Y = A·O in one pass.
DenseMatrix sample_pass(ChunkStream& stream, std::size_t samples, std::uint64_t seed,
                        Sampling sampling = Sampling::per_chunk, const ColumnKey& key = {});
/// (A Aᵀ) Y in one pass.
DenseMatrix power_pass(ChunkStream& stream, const DenseMatrix& y);
/// X = (QᵀA)(QᵀA)ᵀ in one pass. Q is assumed orthonormal.
SymmetricMatrix covariance_pass(ChunkStream& stream, const DenseMatrix& q);
/// Recovers the top-k factors from the compressed problem. Requires
/// k <= q.cols() == x.dim().
Decomposition finalize(const DenseMatrix& q, const SymmetricMatrix& x, std::size_t k);

/// Full pipeline; consumes exactly 2 + cfg.q passes. The stream must be
/// reopenable.
Decomposition decompose_p2(ChunkStream& stream, const DecompConfig& cfg);

}  // namespace ssvd
