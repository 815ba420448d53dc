#include <array>
#include <limits>

#include "binary_io.hpp"
#include "ssvd/errors.hpp"
#include "ssvd/stream.hpp"

namespace ssvd {
namespace {

constexpr std::uint64_t kHeaderBytes = 5 + 8 + 8;

template <typename T, typename Vec>
void read_array(std::ifstream& in, Vec& out, std::uint64_t count, std::uint64_t offset) {
  out.resize(static_cast<std::size_t>(count));
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count * sizeof(T)));
  if (!in) throw FormatError("chunk stream: unexpected end of file", offset);
  if constexpr (std::endian::native == std::endian::big)
    for (auto& v : out) v = detail::byteswap_if_big(v);
}

std::uint64_t read_u64(std::ifstream& in, std::uint64_t offset) {
  std::array<std::uint8_t, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), 8);
  if (!in) throw FormatError("chunk stream: unexpected end of file", offset);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

template <typename T>
void put_array(std::ofstream& out, std::span<const T> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (T v : values) {
      v = detail::byteswap_if_big(v);
      out.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
  }
}

void put_u64(std::ofstream& out, std::uint64_t v) { put_array<std::uint64_t>(out, std::span<const std::uint64_t>(&v, 1)); }

}  // namespace

FileChunkStream::FileChunkStream(const std::filesystem::path& path) : path_(path) {
  std::error_code ec;
  file_size_ = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
  in_.open(path, std::ios::binary);
  if (!in_) throw IoError("cannot open " + path.string());

  std::array<char, 5> magic{};
  in_.read(magic.data(), 5);
  if (!in_ || !std::equal(magic.begin(), magic.begin() + 4, kStreamMagic))
    throw FormatError("chunk stream: bad magic", 0);
  if (static_cast<std::uint8_t>(magic[4]) != kStreamVersion) throw FormatError("chunk stream: unsupported version", 4);
  const std::uint64_t m = read_u64(in_, 5);
  if (m > static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max()))
    throw FormatError("chunk stream: feature count must be below 2^31", 5);
  const std::uint64_t chunks = read_u64(in_, 13);
  // Every chunk needs at least 24 bytes (n_i, nnz, col_ptr[0]).
  if (chunks > (file_size_ - kHeaderBytes) / 24) throw FormatError("chunk stream: chunk count exceeds file size", 13);
  rows_ = static_cast<std::size_t>(m);
  num_chunks_ = static_cast<std::size_t>(chunks);
  offset_ = kHeaderBytes;
}

std::optional<SparseChunk> FileChunkStream::next() {
  if (next_chunk_ >= num_chunks_) {
    if (next_chunk_ == num_chunks_ && offset_ != file_size_) {
      ++next_chunk_;
      throw FormatError("chunk stream: trailing bytes after final chunk", offset_);
    }
    return std::nullopt;
  }
  const std::uint64_t start = offset_;
  const std::uint64_t remaining = file_size_ - offset_;
  if (remaining < 16) throw FormatError("chunk stream: truncated chunk header", start);
  const std::uint64_t n = read_u64(in_, start);
  const std::uint64_t nnz = read_u64(in_, start + 8);
  const std::uint64_t body = remaining - 16;
  if (n >= body / 8) throw FormatError("chunk stream: column count overflows file", start);
  const std::uint64_t ptr_bytes = (n + 1) * 8;
  if (nnz > (body - ptr_bytes) / 12) throw FormatError("chunk stream: nnz overflows file", start + 8);

  SparseBuffer<std::uint64_t> col_ptr;
  SparseBuffer<std::uint32_t> row_idx;
  SparseBuffer<double> values;
  read_array<std::uint64_t>(in_, col_ptr, n + 1, start + 16);
  read_array<std::uint32_t>(in_, row_idx, nnz, start + 16 + ptr_bytes);
  read_array<double>(in_, values, nnz, start + 16 + ptr_bytes + nnz * 4);
  offset_ = start + 16 + ptr_bytes + nnz * 12;
  ++next_chunk_;
  try {
    return SparseChunk(rows_, std::move(col_ptr), std::move(row_idx), std::move(values));
  } catch (const FormatError&) {
    throw;
  } catch (const DataError& e) {
    throw FormatError(std::string("chunk stream: invalid chunk ") + std::to_string(next_chunk_ - 1) + ": " + e.what(),
                      start);
  }
}

void FileChunkStream::rewind() {
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(kHeaderBytes));
  offset_ = kHeaderBytes;
  next_chunk_ = 0;
}

std::unique_ptr<FileChunkStream> open_stream(const std::filesystem::path& path) {
  return std::make_unique<FileChunkStream>(path);
}

StreamWriter::StreamWriter(const std::filesystem::path& path, std::size_t rows) : path_(path), rows_(rows) {
  if (rows > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()))
    throw ContractError("write_stream: feature count must be below 2^31");
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot create " + path.string());
  out_.write(kStreamMagic, 4);
  out_.put(static_cast<char>(kStreamVersion));
  put_u64(out_, rows);
  put_u64(out_, 0);
}

StreamWriter::~StreamWriter() {
  if (!finished_) {
    try {
      finish();
    } catch (...) {
    }
  }
}

void StreamWriter::write(const SparseChunk& chunk) {
  SSVD_REQUIRE(!finished_, "StreamWriter: write after finish");
  SSVD_REQUIRE(chunk.rows() == rows_, "write_stream: chunk row count mismatch");
  put_u64(out_, chunk.cols());
  put_u64(out_, chunk.nnz());
  put_array(out_, chunk.col_ptr());
  put_array(out_, chunk.row_idx());
  put_array(out_, chunk.values());
  if (!out_) throw IoError("write failed on " + path_.string());
  ++count_;
}

void StreamWriter::finish() {
  if (finished_) return;
  finished_ = true;
  out_.seekp(13);
  put_u64(out_, count_);
  out_.close();
  if (!out_) throw IoError("write failed on " + path_.string());
}

}  // namespace ssvd
