#include "ssvd/stream.hpp"

#include <algorithm>

#include "ssvd/errors.hpp"

namespace ssvd {

MemoryChunkStream::MemoryChunkStream(std::size_t rows, std::vector<SparseChunk> chunks)
    : rows_(rows), chunks_(std::move(chunks)) {
  for (const auto& c : chunks_) SSVD_REQUIRE(c.rows() == rows_, "MemoryChunkStream: chunk row count mismatch");
}

MemoryChunkStream MemoryChunkStream::from_dense(const DenseMatrix& a, std::size_t chunk_size) {
  SSVD_REQUIRE(chunk_size >= 1, "from_dense: chunk_size must be >= 1");
  const SparseChunk whole = SparseChunk::from_dense(a);
  std::vector<SparseChunk> chunks;
  for (std::size_t b = 0; b < whole.cols(); b += chunk_size)
    chunks.push_back(whole.slice(b, std::min(whole.cols(), b + chunk_size)));
  return MemoryChunkStream(a.rows(), std::move(chunks));
}

std::optional<SparseChunk> MemoryChunkStream::next() {
  if (pos_ >= chunks_.size()) return std::nullopt;
  return chunks_[pos_++];
}

DenseMatrix MemoryChunkStream::to_dense() const {
  std::size_t n = 0;
  for (const auto& c : chunks_) n += c.cols();
  DenseMatrix d(rows_, n);
  std::size_t off = 0;
  for (const auto& c : chunks_) {
    for (std::size_t j = 0; j < c.cols(); ++j) {
      auto r = c.col_rows(j);
      auto v = c.col_values(j);
      for (std::size_t p = 0; p < r.size(); ++p) d(r[p], off + j) = v[p];
    }
    off += c.cols();
  }
  return d;
}

RechunkStream::RechunkStream(ChunkStream& source, std::size_t chunk_size) : source_(source), chunk_size_(chunk_size) {
  SSVD_REQUIRE(chunk_size >= 1, "rechunk: chunk_size must be >= 1");
}

std::optional<SparseChunk> RechunkStream::next() {
  if (exhausted_) return std::nullopt;
  SparseChunk out(source_.rows());
  while (out.cols() < chunk_size_) {
    if (!pending_ || pending_pos_ == pending_->cols()) {
      pending_.reset();
      pending_ = source_.next();
      pending_pos_ = 0;
      if (!pending_) {
        exhausted_ = true;
        break;
      }
      SSVD_REQUIRE(pending_->rows() == source_.rows(), "rechunk: chunk row count mismatch");
      continue;
    }
    const std::size_t take = std::min(chunk_size_ - out.cols(), pending_->cols() - pending_pos_);
    for (std::size_t j = pending_pos_; j < pending_pos_ + take; ++j)
      out.append_column(pending_->col_rows(j), pending_->col_values(j));
    pending_pos_ += take;
  }
  if (out.cols() == 0) return std::nullopt;
  return out;
}

void RechunkStream::rewind() {
  source_.rewind();
  pending_.reset();
  pending_pos_ = 0;
  exhausted_ = false;
}

std::optional<SparseChunk> PassCounter::next() {
  auto chunk = wrapped_.next();
  const auto total = wrapped_.chunk_count();
  if (chunk) {
    ++in_pass_;
    columns_ += chunk->cols();
    if (total && in_pass_ == *total && !counted_) {
      ++passes_;
      counted_ = true;
    }
  } else if (!counted_) {
    ++passes_;
    counted_ = true;
  }
  return chunk;
}

void PassCounter::rewind() {
  wrapped_.rewind();
  in_pass_ = 0;
  columns_ = 0;
  counted_ = false;
}

void write_stream(ChunkStream& chunks, const std::filesystem::path& path) {
  chunks.rewind();
  StreamWriter w(path, chunks.rows());
  while (auto c = chunks.next()) w.write(*c);
  w.finish();
}

void write_stream(std::size_t rows, const std::vector<SparseChunk>& chunks, const std::filesystem::path& path) {
  StreamWriter w(path, rows);
  for (const auto& c : chunks) w.write(c);
  w.finish();
}

std::size_t count_observations(ChunkStream& stream) {
  stream.rewind();
  std::size_t n = 0;
  while (auto c = stream.next()) n += c->cols();
  return n;
}

}  // namespace ssvd
