#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ssvd/decomposition.hpp"
#include "ssvd/dense.hpp"

namespace ssvd {

/// Oracle values at or below this are excluded from relative errors.
inline constexpr double kOracleFloor = 1e-12;
/// Relative overestimation above this is flagged as an underestimation violation.
inline constexpr double kOverestimateTolerance = 1e-9;

struct SpectrumReport {
  std::vector<double> estimate;
  std::vector<double> oracle;
  /// (estimate - oracle) / oracle; NaN where oracle <= kOracleFloor.
  std::vector<double> rel_err;
  /// Over the defined entries of rel_err, in absolute value.
  double max_rel_err = 0.0;
  double mean_rel_err = 0.0;
  /// Indices whose rel_err exceeds kOverestimateTolerance.
  std::vector<std::size_t> overestimated;

  std::string algorithm;
  DecompConfig config;
  double wall_ms = 0.0;
  std::size_t passes = 0;
};

/// Compares an estimated spectrum against the oracle's. Throws DataError if
/// either is empty and ContractError if the estimate is longer.
SpectrumReport compare_spectra(const Spectrum& estimate, const Spectrum& oracle);
/// compare_spectra on d.S, with the estimate zero-padded to the oracle's length
/// when d is rank deficient, and the run details copied over.
SpectrumReport compare_decomposition(const Decomposition& d, const Spectrum& oracle);

/// Number of i with estimate[i] > oracle[i] + tol * oracle[0].
std::size_t count_overestimates(const Spectrum& estimate, const Spectrum& oracle, double tol = kOverestimateTolerance);

/// One-sided sign test: P(X >= wins) for X ~ Binomial(trials, 1/2).
double sign_test_p_value(std::size_t wins, std::size_t trials);

/// Cosines of the principal angles between the column spans of two
/// orthonormal bases with equal row counts, descending.
std::vector<double> principal_cosines(const DenseMatrix& a, const DenseMatrix& b);

struct CsvRow {
  std::string algo;
  std::size_t k = 0, l = 0, q = 0, chunk_size = 0;
  std::uint64_t seed = 0;
  std::size_t nodes = 1;
  std::size_t factor_index = 0;
  double estimate = 0.0, oracle = 0.0, rel_err = 0.0, wall_ms = 0.0;
  std::size_t passes = 0;
};

inline constexpr const char* kCsvHeader =
    "algo,k,l,q,chunk_size,seed,nodes,factor_index,estimate,oracle,rel_err,wall_ms,passes";

/// One row per factor of `report`.
std::vector<CsvRow> csv_rows(const SpectrumReport& report, std::size_t chunk_size, std::size_t nodes);
/// Header plus rows. Numbers use a fixed format, so equal inputs give
/// byte-identical output.
void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);

}  // namespace ssvd
