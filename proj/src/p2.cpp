#include "ssvd/p2.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "ssvd/errors.hpp"
#include "ssvd/kernels.hpp"
#include "ssvd/linalg.hpp"
#include "ssvd/random.hpp"

namespace ssvd {
namespace {

// Column tile width: a tile temporary of width x samples never exceeds the
// rows x samples matrices the pass already holds.
std::size_t tile_width(std::size_t rows, std::size_t cols) { return std::max<std::size_t>(1, std::min(cols, rows)); }

void check_rows(const SparseChunk& c, std::size_t rows) {
  if (c.rows() != rows) throw ContractError("chunk has " + std::to_string(c.rows()) + " rows, expected " + std::to_string(rows));
}

}  // namespace

void DecompConfig::validate(std::size_t rows) const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (chunk_size && *chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
  if (k + l > rows)
    throw ConfigError("k + l = " + std::to_string(k + l) + " exceeds the feature count " + std::to_string(rows));
}

std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk_index) noexcept { return mix_seed(seed, chunk_index); }

void accumulate_sample(DenseMatrix& y, const SparseChunk& c, std::uint64_t block_seed) {
  check_rows(c, y.rows());
  const std::size_t n = c.cols();
  const std::size_t p = y.cols();
  const std::size_t width = tile_width(y.rows(), n);
  for (std::size_t t0 = 0; t0 < n; t0 += width) {
    const std::size_t t1 = std::min(n, t0 + width);
    DenseMatrix tile(t1 - t0, p);
    const auto cols = static_cast<std::int64_t>(p);
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < cols; ++s) {
      const auto sc = static_cast<std::size_t>(s);
      for (std::size_t j = t0; j < t1; ++j) tile(j - t0, sc) = standard_normal_at(block_seed, sc * n + j);
    }
    kernels::spmm_accumulate(y, c, t0, t1, tile);
  }
}

void accumulate_sample_per_column(DenseMatrix& y, const SparseChunk& c, std::uint64_t seed, std::uint64_t first_column,
                                  const ColumnKey& key) {
  check_rows(c, y.rows());
  const std::size_t n = c.cols();
  const std::size_t p = y.cols();
  const std::size_t width = tile_width(y.rows(), n);
  for (std::size_t t0 = 0; t0 < n; t0 += width) {
    const std::size_t t1 = std::min(n, t0 + width);
    DenseMatrix tile(t1 - t0, p);
    for (std::size_t j = t0; j < t1; ++j) {
      const std::uint64_t global = first_column + j;
      const std::uint64_t row_seed = mix_seed(seed, key ? key(global) : global);
      for (std::size_t s = 0; s < p; ++s) tile(j - t0, s) = standard_normal_at(row_seed, s);
    }
    kernels::spmm_accumulate(y, c, t0, t1, tile);
  }
}

void accumulate_power(DenseMatrix& out, const SparseChunk& c, const DenseMatrix& y) {
  check_rows(c, y.rows());
  SSVD_REQUIRE(out.rows() == y.rows() && out.cols() == y.cols(), "power: output shape mismatch");
  const std::size_t n = c.cols();
  const std::size_t width = tile_width(y.rows(), n);
  for (std::size_t t0 = 0; t0 < n; t0 += width) {
    const std::size_t t1 = std::min(n, t0 + width);
    DenseMatrix z(t1 - t0, y.cols());
    kernels::spmm_t_into(z, c, t0, t1, y);
    kernels::spmm_accumulate(out, c, t0, t1, z);
  }
}

void accumulate_covariance(DenseMatrix& x, const SparseChunk& c, const DenseMatrix& q) {
  check_rows(c, q.rows());
  const std::size_t n = c.cols();
  const std::size_t width = tile_width(q.rows(), n);
  for (std::size_t t0 = 0; t0 < n; t0 += width) {
    const std::size_t t1 = std::min(n, t0 + width);
    DenseMatrix w(t1 - t0, q.cols());
    kernels::spmm_t_into(w, c, t0, t1, q);
    kernels::syrk_tn_accumulate(x, w);
  }
}

DenseMatrix sample_pass(ChunkStream& stream, std::size_t samples, std::uint64_t seed, Sampling sampling,
                        const ColumnKey& key) {
  SSVD_REQUIRE(samples <= stream.rows(), "sample_pass: more samples than features");
  stream.rewind();
  DenseMatrix y(stream.rows(), samples);
  std::uint64_t index = 0;
  std::uint64_t column = 0;
  while (auto c = stream.next()) {
    if (sampling == Sampling::per_chunk)
      accumulate_sample(y, *c, chunk_seed(seed, index));
    else
      accumulate_sample_per_column(y, *c, seed, column, key);
    ++index;
    column += c->cols();
  }
  return y;
}

DenseMatrix power_pass(ChunkStream& stream, const DenseMatrix& y) {
  SSVD_REQUIRE(y.rows() == stream.rows(), "power_pass: sample matrix row count mismatch");
  stream.rewind();
  DenseMatrix out(y.rows(), y.cols());
  while (auto c = stream.next()) accumulate_power(out, *c, y);
  return out;
}

SymmetricMatrix covariance_pass(ChunkStream& stream, const DenseMatrix& q) {
  SSVD_REQUIRE(q.rows() == stream.rows(), "covariance_pass: basis row count mismatch");
  stream.rewind();
  DenseMatrix lower(q.cols(), q.cols());
  while (auto c = stream.next()) accumulate_covariance(lower, *c, q);
  return SymmetricMatrix::from_lower(lower);
}

Decomposition finalize(const DenseMatrix& q, const SymmetricMatrix& x, std::size_t k) {
  SSVD_REQUIRE(q.cols() == x.dim(), "finalize: basis and covariance sizes disagree");
  if (k > x.dim())
    throw ContractError("finalize: requested " + std::to_string(k) + " factors from a rank-" +
                        std::to_string(x.dim()) + " basis");
  SymmetricEigen eig = sym_eigh(x);
  std::vector<double> s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = std::sqrt(std::max(eig.values[i], 0.0));
  Decomposition d;
  d.U = kernels::matmul(q, eig.vectors, k);
  normalize_column_signs(d.U);
  d.S = Spectrum(std::move(s));
  d.config.k = k;
  return d;
}

Decomposition decompose_p2(ChunkStream& stream, const DecompConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate(stream.rows());
  if (!stream.reopenable()) throw ConfigError("decompose_p2 needs a reopenable stream (2 + q passes)");
  PeakScope peak(MemoryKind::dense);

  std::unique_ptr<RechunkStream> rechunked;
  ChunkStream* source = &stream;
  if (cfg.chunk_size) {
    rechunked = std::make_unique<RechunkStream>(stream, *cfg.chunk_size);
    source = rechunked.get();
  }
  PassCounter counter(*source);

  DenseMatrix y = sample_pass(counter, cfg.budget(), cfg.seed, cfg.sampling, cfg.column_key);
  for (std::size_t it = 0; it < cfg.q; ++it) {
    y = power_pass(counter, y);
    if (cfg.reorthonormalize) {
      DenseMatrix basis = orthonormalize(std::move(y));
      y = std::move(basis);
    }
  }
  const DenseMatrix q = orthonormalize(std::move(y));
  const SymmetricMatrix x = covariance_pass(counter, q);

  const std::size_t rank = q.cols();
  Decomposition d = finalize(q, x, std::min(cfg.k, rank));
  d.config = cfg;
  d.algorithm = "p2";
  d.rank_deficient = rank < cfg.k;
  d.passes = counter.passes_completed();
  d.observations = counter.columns_in_current_pass();
  d.peak_dense_values = peak.peak_bytes() / sizeof(double);
  d.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return d;
}

}  // namespace ssvd
