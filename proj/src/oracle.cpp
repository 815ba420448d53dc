#include "ssvd/oracle.hpp"

#include <chrono>
#include <cmath>

#include "ssvd/errors.hpp"
#include "ssvd/kernels.hpp"
#include "ssvd/linalg.hpp"

namespace ssvd {

Decomposition oracle_decompose(ChunkStream& stream, std::size_t k) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t m = stream.rows();
  if (m > kOracleMaxRows)
    throw ConfigError("oracle: " + std::to_string(m) + " features exceed the brute-force limit of " +
                      std::to_string(kOracleMaxRows) + "; reduce the vocabulary or compare against a P1/P2 run");
  SSVD_REQUIRE(k >= 1 && k <= m, "oracle: k must be in [1, rows]");

  DenseMatrix lower(m, m);
  PassCounter counter(stream);
  counter.rewind();
  while (auto c = counter.next()) {
    for (std::size_t j = 0; j < c->cols(); ++j) {
      auto rows = c->col_rows(j);
      auto vals = c->col_values(j);
      // Rows are strictly increasing, so s >= p stays in the lower triangle.
      for (std::size_t p = 0; p < rows.size(); ++p)
        for (std::size_t s = p; s < rows.size(); ++s) lower(rows[s], rows[p]) += vals[s] * vals[p];
    }
  }
  SymmetricEigen eig = sym_eigh(SymmetricMatrix::from_lower(lower));

  std::vector<double> s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = std::sqrt(std::max(eig.values[i], 0.0));
  Decomposition d;
  d.U = eig.vectors.leading_cols(k);
  normalize_column_signs(d.U);
  d.rank_deficient = s.back() == 0.0;
  d.S = Spectrum(std::move(s));
  d.config.k = k;
  d.algorithm = "oracle";
  d.passes = counter.passes_completed();
  d.observations = counter.columns_in_current_pass();
  d.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return d;
}

Decomposition oracle_decompose(const DenseMatrix& a, std::size_t k) {
  MemoryChunkStream s(a.rows(), {SparseChunk::from_dense(a)});
  return oracle_decompose(s, k);
}

}  // namespace ssvd
