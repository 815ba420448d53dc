#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

namespace ssvd {

struct ShuffleOptions {
  /// Output chunk width; 0 keeps the widest input chunk width.
  std::size_t chunk_size = 0;
  /// Target number of columns per on-disk bucket; bounds the columns held in
  /// memory at once.
  std::size_t bucket_columns = 1 << 16;
};

/// Sort key of input column `column` under `seed`.
std::uint64_t shuffle_key(std::uint64_t seed, std::uint64_t column) noexcept;

/// Offline permutation of the columns of a chunk stream file.
///
/// The output order is the input column indices sorted ascending by
/// (shuffle_key(seed, j), j). Columns are first distributed over temporary
/// bucket files by key range (buckets are contiguous key intervals, so sorting
/// each bucket separately gives the global order), then every bucket is loaded,
/// sorted and appended to `path_out`. Uses O(n) disk and memory proportional
/// to one bucket.
void shuffle_stream(const std::filesystem::path& path_in, const std::filesystem::path& path_out, std::uint64_t seed,
                    const ShuffleOptions& options = {});

}  // namespace ssvd
