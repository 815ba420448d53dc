#pragma once

#include <cstddef>
#include <cstdint>

#include "ssvd/decomposition.hpp"
#include "ssvd/dense.hpp"
#include "ssvd/sparse.hpp"
#include "ssvd/stream.hpp"

namespace ssvd {

/// Truncated summary of a chunk or of a merged prefix of the stream.
struct PartialDecomposition {
  DenseMatrix U;  // rows x r, orthonormal
  Spectrum S;     // r values, descending
  std::size_t observations_seen = 0;

  std::size_t rank() const noexcept { return S.size(); }
  std::size_t rows() const noexcept { return U.rows(); }
  static PartialDecomposition empty(std::size_t rows) { return {DenseMatrix(rows, 0), Spectrum(), 0}; }
};

enum class DecomposerKind : std::uint8_t { exact = 0, stochastic = 1 };

/// The in-core decomposition applied to every chunk before merging.
struct InCoreDecomposer {
  DecomposerKind kind = DecomposerKind::exact;
  std::size_t power_iters = 0;  // stochastic only
  std::uint64_t seed = 0;       // stochastic only

  static InCoreDecomposer exact() { return {}; }
  static InCoreDecomposer stochastic(std::size_t power_iters, std::uint64_t seed) {
    return {DecomposerKind::stochastic, power_iters, seed};
  }
  /// The decomposer used for chunk `index` of a stream: same kind, seed
  /// mixed with the chunk index.
  InCoreDecomposer for_chunk(std::uint64_t index) const;
};

/// Top-`budget` left singular structure of one chunk.
///
/// exact: QR of the densified chunk followed by the eigendecomposition of RRᵀ.
/// stochastic: the sketch-and-compress pipeline run in core on the chunk with
/// min(budget, rows) samples and `power_iters` power iterations.
/// Factors whose singular value is exactly zero are dropped, so r is at most
/// min(budget, numerical rank).
PartialDecomposition decompose_chunk_incore(const SparseChunk& chunk, std::size_t budget,
                                            const InCoreDecomposer& decomposer);

/// Top-`budget` left singular structure of [a.U diag(a.S), b.U diag(b.S)].
/// Costs O(rows * (a.rank() + b.rank())^2).
PartialDecomposition merge(const PartialDecomposition& a, const PartialDecomposition& b, std::size_t budget);

/// One-pass fold: decompose every chunk in core at budget k + l, merge into the
/// running decomposition in stream order, truncate to k at the end.
Decomposition decompose_p1(ChunkStream& stream, const DecompConfig& cfg,
                           const InCoreDecomposer& decomposer = InCoreDecomposer::exact());

/// decompose_p1 with the stochastic in-core decomposer
/// (power_iters = cfg.q, seed = cfg.seed).
Decomposition decompose_p12(ChunkStream& stream, const DecompConfig& cfg);

/// Final truncation shared by the local and distributed drivers.
Decomposition to_decomposition(PartialDecomposition partial, const DecompConfig& cfg);

}  // namespace ssvd
