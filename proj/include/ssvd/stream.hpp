#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <vector>

#include "ssvd/sparse.hpp"

namespace ssvd {

/// A sequential source of observation chunks over a fixed feature count.
///
/// A pass is one complete read from rewind() until next() returns nullopt.
/// Multi-pass algorithms call rewind() before every pass; rewinding a stream
/// that has not been read yet is a no-op on every implementation.
class ChunkStream {
 public:
  virtual ~ChunkStream() = default;

  virtual std::size_t rows() const = 0;
  virtual std::optional<SparseChunk> next() = 0;
  /// Restarts the sequence. Throws ConfigError on a one-shot stream that has
  /// already yielded data.
  virtual void rewind() = 0;
  virtual bool reopenable() const { return true; }
  /// Number of chunks per pass when known up front.
  virtual std::optional<std::size_t> chunk_count() const { return std::nullopt; }
};

/// Chunks held in memory. Mostly for tests and small fixtures.
class MemoryChunkStream final : public ChunkStream {
 public:
  MemoryChunkStream(std::size_t rows, std::vector<SparseChunk> chunks);
  /// Splits `a` into consecutive chunks of `chunk_size` columns.
  static MemoryChunkStream from_dense(const DenseMatrix& a, std::size_t chunk_size);

  std::size_t rows() const override { return rows_; }
  std::optional<SparseChunk> next() override;
  void rewind() override { pos_ = 0; }
  std::optional<std::size_t> chunk_count() const override { return chunks_.size(); }

  const std::vector<SparseChunk>& chunks() const noexcept { return chunks_; }
  /// Concatenation of all chunks as one dense matrix.
  DenseMatrix to_dense() const;

 private:
  std::size_t rows_;
  std::vector<SparseChunk> chunks_;
  std::size_t pos_ = 0;
};

/// Presents the observations of `source` in chunks of exactly `chunk_size`
/// columns (the last one may be shorter). Holds at most one source chunk and
/// one output chunk at a time. Does not own `source`.
class RechunkStream final : public ChunkStream {
 public:
  RechunkStream(ChunkStream& source, std::size_t chunk_size);

  std::size_t rows() const override { return source_.rows(); }
  std::optional<SparseChunk> next() override;
  void rewind() override;
  bool reopenable() const override { return source_.reopenable(); }

 private:
  ChunkStream& source_;
  std::size_t chunk_size_;
  std::optional<SparseChunk> pending_;
  std::size_t pending_pos_ = 0;
  bool exhausted_ = false;
};

/// Counts complete passes over the wrapped stream. A pass is counted when the
/// final chunk is consumed (if the chunk count is known) or when the end of the
/// sequence is observed (otherwise, and for empty streams). Does not own the
/// wrapped stream.
class PassCounter final : public ChunkStream {
 public:
  explicit PassCounter(ChunkStream& wrapped) : wrapped_(wrapped) {}

  std::size_t rows() const override { return wrapped_.rows(); }
  std::optional<SparseChunk> next() override;
  void rewind() override;
  bool reopenable() const override { return wrapped_.reopenable(); }
  std::optional<std::size_t> chunk_count() const override { return wrapped_.chunk_count(); }

  std::size_t passes_completed() const noexcept { return passes_; }
  std::size_t chunks_in_current_pass() const noexcept { return in_pass_; }
  std::size_t columns_in_current_pass() const noexcept { return columns_; }

 private:
  ChunkStream& wrapped_;
  std::size_t passes_ = 0;
  std::size_t in_pass_ = 0;
  std::size_t columns_ = 0;
  bool counted_ = false;
};

inline std::size_t count_passes(const PassCounter& counter) noexcept { return counter.passes_completed(); }

// Binary chunk stream file:
//   "SSVD" 0x01 | u64 m | u64 num_chunks |
//   per chunk: u64 n_i | u64 nnz | (n_i+1) x u64 col_ptr | nnz x u32 row_idx | nnz x f64 values
// All integers and floats little-endian.
inline constexpr char kStreamMagic[4] = {'S', 'S', 'V', 'D'};
inline constexpr std::uint8_t kStreamVersion = 0x01;

/// Lazily reads a binary chunk stream file; holds one chunk in memory.
class FileChunkStream final : public ChunkStream {
 public:
  explicit FileChunkStream(const std::filesystem::path& path);

  std::size_t rows() const override { return rows_; }
  std::optional<SparseChunk> next() override;
  void rewind() override;
  std::optional<std::size_t> chunk_count() const override { return num_chunks_; }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::uint64_t file_size_ = 0;
  std::size_t rows_ = 0;
  std::size_t num_chunks_ = 0;
  std::size_t next_chunk_ = 0;
  std::uint64_t offset_ = 0;
};

/// Opens a binary chunk stream file. Throws FormatError on a bad header.
std::unique_ptr<FileChunkStream> open_stream(const std::filesystem::path& path);

/// Incremental writer; the chunk count in the header is patched by finish().
class StreamWriter {
 public:
  StreamWriter(const std::filesystem::path& path, std::size_t rows);
  ~StreamWriter();
  StreamWriter(const StreamWriter&) = delete;
  StreamWriter& operator=(const StreamWriter&) = delete;

  void write(const SparseChunk& chunk);
  void finish();
  std::size_t chunks_written() const noexcept { return count_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t rows_;
  std::size_t count_ = 0;
  bool finished_ = false;
};

/// Writes one full pass of `chunks` (rewinding it first).
void write_stream(ChunkStream& chunks, const std::filesystem::path& path);
void write_stream(std::size_t rows, const std::vector<SparseChunk>& chunks, const std::filesystem::path& path);

/// Total observation count n, by one full pass.
std::size_t count_observations(ChunkStream& stream);

}  // namespace ssvd
