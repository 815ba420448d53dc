#include "ssvd/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "ssvd/errors.hpp"
#include "ssvd/sparse.hpp"
#include "ssvd/stream.hpp"

namespace ssvd {

Document tokenize(std::string_view text) {
  Document out;
  std::string cur;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> build_vocabulary(const std::vector<Document>& documents, std::size_t vocab_size) {
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& doc : documents)
    for (const auto& tok : doc) ++freq[tok];
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > vocab_size) ranked.resize(vocab_size);
  std::vector<std::string> vocab;
  vocab.reserve(ranked.size());
  for (auto& [tok, _] : ranked) vocab.push_back(tok);
  return vocab;
}

IngestResult ingest_corpus(const std::vector<Document>& documents, const IngestOptions& options,
                           const std::filesystem::path& stream_out, const std::filesystem::path& vocab_out) {
  if (documents.empty()) throw DataError("ingest: empty corpus");
  if (options.vocab_size < 1) throw ConfigError("ingest: vocab_size must be >= 1");
  if (options.chunk_size < 1) throw ConfigError("ingest: chunk_size must be >= 1");

  IngestResult result;
  result.vocabulary = build_vocabulary(documents, options.vocab_size);
  result.documents = documents.size();
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::size_t i = 0; i < result.vocabulary.size(); ++i)
    index.emplace(result.vocabulary[i], static_cast<std::uint32_t>(i));

  const std::size_t m = result.vocabulary.size();
  std::vector<std::size_t> df(m, 0);
  std::vector<std::map<std::uint32_t, double>> columns;
  columns.reserve(documents.size());
  for (const auto& doc : documents) {
    std::map<std::uint32_t, double> tf;
    for (const auto& tok : doc)
      if (auto it = index.find(tok); it != index.end()) tf[it->second] += 1.0;
    for (const auto& [row, _] : tf) ++df[row];
    if (tf.empty()) ++result.empty_documents;
    columns.push_back(std::move(tf));
  }

  const double n_docs = static_cast<double>(documents.size());
  StreamWriter writer(stream_out, m);
  SparseChunk chunk(m);
  std::vector<std::uint32_t> rows;
  std::vector<double> vals;
  for (const auto& tf : columns) {
    rows.clear();
    vals.clear();
    for (const auto& [row, count] : tf) {
      double w = count;
      if (options.weighting == Weighting::tfidf) w = count * std::log(n_docs / static_cast<double>(df[row]));
      if (w == 0.0) continue;
      rows.push_back(row);
      vals.push_back(w);
    }
    if (options.normalize && !vals.empty()) {
      double s = 0.0;
      for (double v : vals) s += v * v;
      const double inv = 1.0 / std::sqrt(s);
      for (double& v : vals) v *= inv;
    }
    chunk.append_column(rows, vals);
    if (chunk.cols() == options.chunk_size) {
      writer.write(chunk);
      chunk = SparseChunk(m);
    }
  }
  if (chunk.cols() > 0) writer.write(chunk);
  writer.finish();
  write_vocabulary(result.vocabulary, vocab_out);
  return result;
}

std::vector<Document> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Document> docs;
  std::string line;
  while (std::getline(in, line)) docs.push_back(tokenize(line));
  return docs;
}

void write_vocabulary(const std::vector<std::string>& vocabulary, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  for (const auto& tok : vocabulary) out << tok << '\n';
  if (!out) throw IoError("write failed on " + path.string());
}

std::vector<std::string> read_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    vocab.push_back(line);
  }
  return vocab;
}

void convert_matrix_market(const std::filesystem::path& mtx, const std::filesystem::path& stream_out,
                           std::size_t chunk_size) {
  if (chunk_size < 1) throw ConfigError("convert: chunk_size must be >= 1");
  std::ifstream in(mtx);
  if (!in) throw IoError("cannot open " + mtx.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("matrix market: empty file");
  std::string banner, object, format, field, symmetry;
  {
    std::istringstream hs(line);
    hs >> banner >> object >> format >> field >> symmetry;
    for (auto* s : {&object, &format, &field, &symmetry})
      std::transform(s->begin(), s->end(), s->begin(), [](unsigned char c) { return std::tolower(c); });
  }
  if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate")
    throw DataError("matrix market: only 'matrix coordinate' files are supported");
  if (field != "real" && field != "integer" && field != "pattern")
    throw DataError("matrix market: unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    throw DataError("matrix market: unsupported symmetry '" + symmetry + "'");

  while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
  }
  std::uint64_t m = 0, n = 0, entries = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> m >> n >> entries)) throw DataError("matrix market: bad size line");
  }
  std::vector<std::tuple<std::uint64_t, std::uint32_t, double>> triples;  // (col, row, value)
  triples.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(entries, 1 << 24)));
  for (std::uint64_t e = 0; e < entries; ++e) {
    if (!std::getline(in, line)) throw DataError("matrix market: fewer entries than declared");
    std::istringstream ss(line);
    std::uint64_t i = 0, j = 0;
    double v = 1.0;
    if (!(ss >> i >> j)) throw DataError("matrix market: bad entry line " + std::to_string(e + 1));
    if (field != "pattern" && !(ss >> v)) throw DataError("matrix market: missing value on entry " + std::to_string(e + 1));
    if (i < 1 || i > m || j < 1 || j > n) throw DataError("matrix market: index out of range on entry " + std::to_string(e + 1));
    if (!std::isfinite(v)) throw DataError("matrix market: non-finite value");
    triples.emplace_back(j - 1, static_cast<std::uint32_t>(i - 1), v);
    if (symmetry == "symmetric" && i != j) triples.emplace_back(i - 1, static_cast<std::uint32_t>(j - 1), v);
  }
  std::sort(triples.begin(), triples.end(),
            [](const auto& a, const auto& b) { return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b)); });

  StreamWriter writer(stream_out, static_cast<std::size_t>(m));
  SparseChunk chunk(static_cast<std::size_t>(m));
  std::vector<std::uint32_t> rows;
  std::vector<double> vals;
  std::size_t t = 0;
  for (std::uint64_t col = 0; col < n; ++col) {
    rows.clear();
    vals.clear();
    while (t < triples.size() && std::get<0>(triples[t]) == col) {
      const auto row = std::get<1>(triples[t]);
      double v = 0.0;
      while (t < triples.size() && std::get<0>(triples[t]) == col && std::get<1>(triples[t]) == row)
        v += std::get<2>(triples[t++]);
      if (v != 0.0) {
        rows.push_back(row);
        vals.push_back(v);
      }
    }
    chunk.append_column(rows, vals);
    if (chunk.cols() == chunk_size) {
      writer.write(chunk);
      chunk = SparseChunk(static_cast<std::size_t>(m));
    }
  }
  if (chunk.cols() > 0) writer.write(chunk);
  writer.finish();
}

}  // namespace ssvd
