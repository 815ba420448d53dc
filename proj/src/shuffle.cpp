#include "ssvd/shuffle.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "binary_io.hpp"
#include "ssvd/errors.hpp"
#include "ssvd/random.hpp"
#include "ssvd/stream.hpp"

namespace ssvd {
namespace {

constexpr std::size_t kMaxBuckets = 256;

struct TempFiles {
  std::vector<std::filesystem::path> paths;
  ~TempFiles() {
    std::error_code ec;
    for (const auto& p : paths) std::filesystem::remove(p, ec);
  }
};

struct Record {
  std::uint64_t key;
  std::uint64_t column;
  std::size_t offset;  // into the bucket's row/value arrays
  std::size_t nnz;
};

}  // namespace

std::uint64_t shuffle_key(std::uint64_t seed, std::uint64_t column) noexcept { return mix_seed(seed, column); }

void shuffle_stream(const std::filesystem::path& path_in, const std::filesystem::path& path_out, std::uint64_t seed,
                    const ShuffleOptions& options) {
  SSVD_REQUIRE(options.bucket_columns >= 1, "shuffle: bucket_columns must be >= 1");
  FileChunkStream input(path_in);

  std::size_t n = 0;
  std::size_t widest = 0;
  while (auto c = input.next()) {
    n += c->cols();
    widest = std::max(widest, c->cols());
  }
  const std::size_t chunk_size = options.chunk_size != 0 ? options.chunk_size : std::max<std::size_t>(widest, 1);
  const std::size_t buckets =
      std::clamp<std::size_t>((n + options.bucket_columns - 1) / options.bucket_columns, 1, kMaxBuckets);

  TempFiles temps;
  std::vector<std::ofstream> bucket_out;
  for (std::size_t b = 0; b < buckets; ++b) {
    temps.paths.push_back(path_out.string() + ".bucket" + std::to_string(b));
    bucket_out.emplace_back(temps.paths.back(), std::ios::binary | std::ios::trunc);
    if (!bucket_out.back()) throw IoError("cannot create " + temps.paths.back().string());
  }

  input.rewind();
  std::uint64_t column = 0;
  while (auto c = input.next()) {
    for (std::size_t j = 0; j < c->cols(); ++j, ++column) {
      const std::uint64_t key = shuffle_key(seed, column);
      const auto b = static_cast<std::size_t>((static_cast<unsigned __int128>(key) * buckets) >> 64);
      detail::ByteWriter w;
      w.put<std::uint64_t>(key);
      w.put<std::uint64_t>(column);
      w.put<std::uint64_t>(c->col_rows(j).size());
      w.put_array(c->col_rows(j));
      w.put_array(c->col_values(j));
      bucket_out[b].write(reinterpret_cast<const char*>(w.bytes().data()),
                          static_cast<std::streamsize>(w.bytes().size()));
    }
  }
  for (auto& o : bucket_out) {
    o.close();
    if (!o) throw IoError("shuffle: failed writing bucket file");
  }

  StreamWriter writer(path_out, input.rows());
  SparseChunk pending(input.rows());
  auto fail = [](const std::string& what, std::uint64_t off) -> void { throw FormatError("shuffle bucket: " + what, off); };
  for (std::size_t b = 0; b < buckets; ++b) {
    std::ifstream in(temps.paths[b], std::ios::binary);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    detail::ByteReader reader(std::span<const std::uint8_t>(bytes), fail);
    std::vector<Record> records;
    std::vector<std::uint32_t> rows;
    std::vector<double> values;
    std::vector<std::uint32_t> r;
    std::vector<double> v;
    while (reader.remaining() > 0) {
      Record rec{};
      rec.key = reader.get<std::uint64_t>("key");
      rec.column = reader.get<std::uint64_t>("column");
      rec.nnz = static_cast<std::size_t>(reader.get<std::uint64_t>("nnz"));
      rec.offset = rows.size();
      reader.get_array<std::uint32_t>(r, rec.nnz, "rows");
      reader.get_array<double>(v, rec.nnz, "values");
      rows.insert(rows.end(), r.begin(), r.end());
      values.insert(values.end(), v.begin(), v.end());
      records.push_back(rec);
    }
    bytes.clear();
    bytes.shrink_to_fit();
    std::sort(records.begin(), records.end(),
              [](const Record& a, const Record& c) { return a.key != c.key ? a.key < c.key : a.column < c.column; });
    for (const Record& rec : records) {
      pending.append_column(std::span<const std::uint32_t>(rows.data() + rec.offset, rec.nnz),
                            std::span<const double>(values.data() + rec.offset, rec.nnz));
      if (pending.cols() == chunk_size) {
        writer.write(pending);
        pending = SparseChunk(input.rows());
      }
    }
  }
  if (pending.cols() > 0) writer.write(pending);
  writer.finish();
}

}  // namespace ssvd
