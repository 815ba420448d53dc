#include "ssvd/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "ssvd/errors.hpp"
#include "ssvd/kernels.hpp"
#include "ssvd/linalg.hpp"

namespace ssvd {

SpectrumReport compare_spectra(const Spectrum& estimate, const Spectrum& oracle) {
  if (estimate.size() == 0 || oracle.size() == 0) throw DataError("compare_spectra: empty spectrum");
  SSVD_REQUIRE(estimate.size() <= oracle.size(), "compare_spectra: estimate longer than oracle");
  SpectrumReport r;
  r.estimate = estimate.values();
  r.oracle.assign(oracle.values().begin(), oracle.values().begin() + static_cast<std::ptrdiff_t>(estimate.size()));
  r.rel_err.resize(estimate.size());
  std::size_t defined = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    if (r.oracle[i] <= kOracleFloor) {
      r.rel_err[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double e = (r.estimate[i] - r.oracle[i]) / r.oracle[i];
    r.rel_err[i] = e;
    if (e > kOverestimateTolerance) r.overestimated.push_back(i);
    r.max_rel_err = std::max(r.max_rel_err, std::abs(e));
    sum += std::abs(e);
    ++defined;
  }
  r.mean_rel_err = defined ? sum / static_cast<double>(defined) : 0.0;
  return r;
}

SpectrumReport compare_decomposition(const Decomposition& d, const Spectrum& oracle) {
  const std::size_t want = std::min(d.config.k, oracle.size());
  SpectrumReport r = compare_spectra(Spectrum(d.S.padded(want)), oracle);
  r.algorithm = d.algorithm;
  r.config = d.config;
  r.wall_ms = d.wall_ms;
  r.passes = d.passes;
  return r;
}

std::size_t count_overestimates(const Spectrum& estimate, const Spectrum& oracle, double tol) {
  SSVD_REQUIRE(estimate.size() <= oracle.size(), "count_overestimates: estimate longer than oracle");
  if (oracle.size() == 0) return 0;
  const double slack = tol * oracle[0];
  std::size_t n = 0;
  for (std::size_t i = 0; i < estimate.size(); ++i)
    if (estimate[i] > oracle[i] + slack) ++n;
  return n;
}

double sign_test_p_value(std::size_t wins, std::size_t trials) {
  SSVD_REQUIRE(wins <= trials, "sign_test_p_value: wins exceed trials");
  // Sum of C(trials, i) / 2^trials for i >= wins, in log space.
  double p = 0.0;
  for (std::size_t i = wins; i <= trials; ++i) {
    const double log_c = std::lgamma(static_cast<double>(trials) + 1) - std::lgamma(static_cast<double>(i) + 1) -
                         std::lgamma(static_cast<double>(trials - i) + 1);
    p += std::exp(log_c - static_cast<double>(trials) * std::log(2.0));
  }
  return std::min(p, 1.0);
}

std::vector<double> principal_cosines(const DenseMatrix& a, const DenseMatrix& b) {
  SSVD_REQUIRE(a.rows() == b.rows(), "principal_cosines: row counts differ");
  const DenseMatrix m = kernels::matmul_tn(a, b);  // a.cols x b.cols
  DenseMatrix lower(m.cols(), m.cols());
  kernels::syrk_tn_accumulate(lower, m);
  const SymmetricEigen eig = sym_eigh(SymmetricMatrix::from_lower(lower));
  const std::size_t n = std::min(a.cols(), b.cols());
  std::vector<double> cos(n);
  for (std::size_t i = 0; i < n; ++i) cos[i] = std::min(1.0, std::sqrt(std::max(eig.values[i], 0.0)));
  return cos;
}

std::vector<CsvRow> csv_rows(const SpectrumReport& report, std::size_t chunk_size, std::size_t nodes) {
  std::vector<CsvRow> rows;
  rows.reserve(report.estimate.size());
  for (std::size_t i = 0; i < report.estimate.size(); ++i) {
    CsvRow row;
    row.algo = report.algorithm;
    row.k = report.config.k;
    row.l = report.config.l;
    row.q = report.config.q;
    row.chunk_size = chunk_size;
    row.seed = report.config.seed;
    row.nodes = nodes;
    row.factor_index = i;
    row.estimate = report.estimate[i];
    row.oracle = report.oracle[i];
    row.rel_err = report.rel_err[i];
    row.wall_ms = report.wall_ms;
    row.passes = report.passes;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  out << kCsvHeader << '\n';
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%zu,%zu,%zu,%zu,%llu,%zu,%zu,%.17g,%.17g,%.9e,%.3f,%zu\n", r.k, r.l, r.q,
                  r.chunk_size, static_cast<unsigned long long>(r.seed), r.nodes, r.factor_index, r.estimate,
                  r.oracle, r.rel_err, r.wall_ms, r.passes);
    out << r.algo << buf;
  }
}

}  // namespace ssvd
