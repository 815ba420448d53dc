#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "ssvd/dense.hpp"

namespace ssvd {

/// How the gaussian test matrix O is keyed.
enum class Sampling {
  /// Block O_i for chunk i is gaussian_matrix(n_i, k+l, mix_seed(seed, i)).
  per_chunk,
  /// Row j of O is keyed by mix_seed(seed, column_key(j)) where j is the
  /// global column position; with a key that follows columns through a
  /// permutation, the sketch is independent of stream order.
  per_column,
};

/// Maps a global column position to the identity used for per-column sampling.
using ColumnKey = std::function<std::uint64_t(std::uint64_t)>;

struct DecompConfig {
  std::size_t k = 1;  // retained factors
  std::size_t l = 0;  // oversampling
  std::size_t q = 0;  // power iterations (P2) or inner power iterations (P12)
  /// Repartition the input into chunks of this many columns; unset keeps the
  /// stream's own chunks.
  std::optional<std::size_t> chunk_size;
  std::uint64_t seed = 0;
  /// Orthonormalize the sample matrix after every power pass (P2 only).
  bool reorthonormalize = false;
  Sampling sampling = Sampling::per_chunk;
  /// Only used with Sampling::per_column; identity when empty.
  ColumnKey column_key;

  std::size_t budget() const noexcept { return k + l; }
  /// Throws ConfigError unless k >= 1, chunk_size >= 1 and k + l <= rows.
  void validate(std::size_t rows) const;
};

/// Truncated left factorisation: U (rows x r, orthonormal) and singular
/// values S (descending). r == config.k unless the input had lower numerical
/// rank, in which case rank_deficient is set and r is that rank.
struct Decomposition {
  DenseMatrix U;
  Spectrum S;
  DecompConfig config;
  std::string algorithm;
  std::size_t passes = 0;
  std::size_t observations = 0;
  double wall_ms = 0.0;
  bool rank_deficient = false;
  /// Peak tracked dense allocation during the run, in doubles.
  std::size_t peak_dense_values = 0;
};

}  // namespace ssvd
