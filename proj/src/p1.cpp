#include "ssvd/p1.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "ssvd/errors.hpp"
#include "ssvd/kernels.hpp"
#include "ssvd/linalg.hpp"
#include "ssvd/p2.hpp"
#include "ssvd/random.hpp"

namespace ssvd {
namespace {

// Top-`budget` factors of the compressed problem (Q, lower(X)), dropping
// factors whose singular value clamps to zero.
PartialDecomposition recover(const DenseMatrix& q, const DenseMatrix& lower, std::size_t budget,
                             std::size_t observations) {
  SymmetricEigen eig = sym_eigh(SymmetricMatrix::from_lower(lower));
  std::size_t keep = std::min(budget, eig.values.size());
  while (keep > 0 && !(eig.values[keep - 1] > 0.0)) --keep;
  std::vector<double> s(keep);
  for (std::size_t i = 0; i < keep; ++i) s[i] = std::sqrt(eig.values[i]);
  PartialDecomposition out;
  out.U = kernels::matmul(q, eig.vectors, keep);
  normalize_column_signs(out.U);
  out.S = Spectrum(std::move(s));
  out.observations_seen = observations;
  return out;
}

PartialDecomposition truncate(const PartialDecomposition& d, std::size_t budget, std::size_t observations) {
  const std::size_t keep = std::min(budget, d.rank());
  return {d.U.leading_cols(keep), d.S.truncated(keep), observations};
}

}  // namespace

InCoreDecomposer InCoreDecomposer::for_chunk(std::uint64_t index) const {
  InCoreDecomposer d = *this;
  if (kind == DecomposerKind::stochastic) d.seed = mix_seed(seed, index);
  return d;
}

PartialDecomposition decompose_chunk_incore(const SparseChunk& chunk, std::size_t budget,
                                            const InCoreDecomposer& decomposer) {
  SSVD_REQUIRE(budget >= 1, "decompose_chunk_incore: budget must be >= 1");
  const std::size_t m = chunk.rows();
  if (chunk.cols() == 0 || chunk.nnz() == 0) return {DenseMatrix(m, 0), Spectrum(), chunk.cols()};

  if (decomposer.kind == DecomposerKind::exact) {
    DenseMatrix dense = chunk.to_dense();
    const DenseMatrix q = orthonormalize(dense);
    // RRᵀ = (DᵀQ)ᵀ(DᵀQ)
    const DenseMatrix w = kernels::matmul_tn(dense, q);
    DenseMatrix lower(q.cols(), q.cols());
    kernels::syrk_tn_accumulate(lower, w);
    return recover(q, lower, budget, chunk.cols());
  }

  const std::size_t samples = std::min(budget, m);
  DenseMatrix y(m, samples);
  accumulate_sample(y, chunk, decomposer.seed);
  for (std::size_t it = 0; it < decomposer.power_iters; ++it) {
    DenseMatrix next(m, samples);
    accumulate_power(next, chunk, y);
    y = std::move(next);
  }
  const DenseMatrix q = orthonormalize(std::move(y));
  DenseMatrix lower(q.cols(), q.cols());
  accumulate_covariance(lower, chunk, q);
  return recover(q, lower, budget, chunk.cols());
}

PartialDecomposition merge(const PartialDecomposition& a, const PartialDecomposition& b, std::size_t budget) {
  if (a.rows() != b.rows())
    throw ContractError("merge: row counts differ (" + std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
  SSVD_REQUIRE(budget >= 1, "merge: budget must be >= 1");
  const std::size_t seen = a.observations_seen + b.observations_seen;
  if (b.rank() == 0) return truncate(a, budget, seen);
  if (a.rank() == 0) return truncate(b, budget, seen);

  const std::size_t m = a.rows();
  const std::size_t ra = a.rank();
  DenseMatrix scaled(m, ra + b.rank());
  for (std::size_t j = 0; j < ra; ++j) {
    auto src = a.U.col(j);
    auto dst = scaled.col(j);
    for (std::size_t i = 0; i < m; ++i) dst[i] = src[i] * a.S[j];
  }
  for (std::size_t j = 0; j < b.rank(); ++j) {
    auto src = b.U.col(j);
    auto dst = scaled.col(ra + j);
    for (std::size_t i = 0; i < m; ++i) dst[i] = src[i] * b.S[j];
  }
  const DenseMatrix q = orthonormalize(scaled);
  // RRᵀ with R = QᵀM, formed as (MᵀQ)ᵀ(MᵀQ).
  const DenseMatrix w = kernels::matmul_tn(scaled, q);
  DenseMatrix lower(q.cols(), q.cols());
  kernels::syrk_tn_accumulate(lower, w);
  return recover(q, lower, budget, seen);
}

Decomposition to_decomposition(PartialDecomposition partial, const DecompConfig& cfg) {
  const std::size_t keep = std::min(cfg.k, partial.rank());
  Decomposition d;
  d.U = partial.U.leading_cols(keep);
  d.S = partial.S.truncated(keep);
  d.config = cfg;
  d.rank_deficient = partial.rank() < cfg.k;
  d.observations = partial.observations_seen;
  return d;
}

Decomposition decompose_p1(ChunkStream& stream, const DecompConfig& cfg, const InCoreDecomposer& decomposer) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate(stream.rows());
  PeakScope peak(MemoryKind::dense);

  std::unique_ptr<RechunkStream> rechunked;
  ChunkStream* source = &stream;
  if (cfg.chunk_size) {
    rechunked = std::make_unique<RechunkStream>(stream, *cfg.chunk_size);
    source = rechunked.get();
  }
  PassCounter counter(*source);
  counter.rewind();

  const std::size_t budget = cfg.budget();
  PartialDecomposition acc = PartialDecomposition::empty(stream.rows());
  std::uint64_t index = 0;
  while (auto chunk = counter.next()) {
    PartialDecomposition part = decompose_chunk_incore(*chunk, budget, decomposer.for_chunk(index++));
    acc = merge(acc, part, budget);
  }

  Decomposition d = to_decomposition(std::move(acc), cfg);
  d.algorithm = decomposer.kind == DecomposerKind::exact ? "p1" : "p12";
  d.passes = counter.passes_completed();
  d.peak_dense_values = peak.peak_bytes() / sizeof(double);
  d.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return d;
}

Decomposition decompose_p12(ChunkStream& stream, const DecompConfig& cfg) {
  return decompose_p1(stream, cfg, InCoreDecomposer::stochastic(cfg.q, cfg.seed));
}

}  // namespace ssvd
