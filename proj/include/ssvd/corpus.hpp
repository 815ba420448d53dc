#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ssvd {

enum class Weighting { count, tfidf };

struct IngestOptions {
  std::size_t vocab_size = 100000;
  Weighting weighting = Weighting::count;
  /// Scale every column to unit Euclidean norm after weighting.
  bool normalize = false;
  std::size_t chunk_size = 1000;
};

struct IngestResult {
  std::vector<std::string> vocabulary;
  std::size_t documents = 0;
  /// Documents without a single in-vocabulary token; kept as empty columns.
  std::size_t empty_documents = 0;
};

using Document = std::vector<std::string>;

/// Lowercased whitespace-separated tokens (ASCII case folding only).
Document tokenize(std::string_view text);

/// The `vocab_size` most frequent tokens by total count, ties broken
/// lexicographically. Position in the result is the feature (row) index.
std::vector<std::string> build_vocabulary(const std::vector<Document>& documents, std::size_t vocab_size);

/// Maps each document to a sparse column and writes the chunk stream plus the
/// vocabulary file. Weights: count = raw term frequency; tfidf = tf * ln(N/df)
/// with df counted over the ingested corpus. Entries whose weight is exactly
/// zero (terms present in every document under tfidf) are omitted.
IngestResult ingest_corpus(const std::vector<Document>& documents, const IngestOptions& options,
                           const std::filesystem::path& stream_out, const std::filesystem::path& vocab_out);

/// Reads one document per line.
std::vector<Document> read_corpus(const std::filesystem::path& path);

void write_vocabulary(const std::vector<std::string>& vocabulary, const std::filesystem::path& path);
std::vector<std::string> read_vocabulary(const std::filesystem::path& path);

/// Converts a MatrixMarket coordinate file (real, integer or pattern; general
/// or symmetric) into a chunk stream with features as rows. Duplicate entries
/// are summed and resulting zeros dropped. Holds all entries in memory.
void convert_matrix_market(const std::filesystem::path& mtx, const std::filesystem::path& stream_out,
                           std::size_t chunk_size);

}  // namespace ssvd
