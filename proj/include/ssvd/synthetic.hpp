#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ssvd/sparse.hpp"
#include "ssvd/stream.hpp"

namespace ssvd {

/// Sparse test matrices with a planted power-law spectrum.
///
/// A = F diag(sigma) Gᵀ with sigma_i = scale * (i+1)^-alpha. Each factor
/// column of F is supported on a random subset of about rows * factor_density
/// rows with gaussian entries, normalised to unit length. Column j of A mixes
/// factor i with probability `activation` and a gaussian weight of variance
/// 1 / (cols * activation), so G has roughly orthonormal columns. The planted
/// values are therefore approximate; use oracle_decompose for exact ones.
///
/// With `drift`, factor activation ramps along the stream (even factors fade
/// in, odd factors fade out) so the dominant subspace changes gradually with
/// column position while the average activation is unchanged.
struct SyntheticSpec {
  std::size_t rows = 200;
  std::size_t cols = 2000;
  std::size_t rank = 0;  // 0 means min(rows, cols)
  double alpha = 1.0;
  double scale = 10.0;
  double factor_density = 0.1;
  double activation = 0.25;
  bool drift = false;
  std::uint64_t seed = 0;

  std::size_t effective_rank() const noexcept;
  double planted_sigma(std::size_t i) const noexcept;
  /// Throws ConfigError for empty shapes or probabilities outside (0, 1].
  void validate() const;
};

/// Column j of the synthetic matrix, generated independently of every other
/// column, so any chunking of the stream yields the same matrix.
class SyntheticStream final : public ChunkStream {
 public:
  explicit SyntheticStream(const SyntheticSpec& spec, std::size_t chunk_size = 200);

  std::size_t rows() const override { return spec_.rows; }
  std::optional<SparseChunk> next() override;
  void rewind() override { pos_ = 0; }
  std::optional<std::size_t> chunk_count() const override;

  const SyntheticSpec& spec() const noexcept { return spec_; }
  /// Entries of column j as (row, value) pairs appended to `chunk`.
  void append_column(SparseChunk& chunk, std::size_t j) const;

 private:
  SyntheticSpec spec_;
  std::size_t chunk_size_;
  std::size_t pos_ = 0;
  // Factor i occupies factor_rows_[offsets_[i] .. offsets_[i+1]).
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> factor_rows_;
  std::vector<double> factor_values_;  // already scaled by sigma_i
};

/// The whole synthetic matrix as one in-memory stream.
MemoryChunkStream materialize(const SyntheticSpec& spec, std::size_t chunk_size);

}  // namespace ssvd
