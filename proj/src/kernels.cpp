#include "ssvd/kernels.hpp"

#include <cstdint>

#include "ssvd/errors.hpp"

namespace ssvd::kernels {
namespace {

void check_spmm(const DenseMatrix& y, const SparseChunk& c, std::size_t begin, std::size_t end, const DenseMatrix& b) {
  SSVD_REQUIRE(begin <= end && end <= c.cols(), "spmm: column range out of bounds");
  SSVD_REQUIRE(b.rows() == end - begin, "spmm: inner dimensions disagree");
  SSVD_REQUIRE(y.rows() == c.rows() && y.cols() == b.cols(), "spmm: output shape mismatch");
}

void check_spmm_t(const DenseMatrix& out, const SparseChunk& c, std::size_t begin, std::size_t end,
                  const DenseMatrix& b) {
  SSVD_REQUIRE(begin <= end && end <= c.cols(), "spmm_t: column range out of bounds");
  SSVD_REQUIRE(b.rows() == c.rows(), "spmm_t: inner dimensions disagree");
  SSVD_REQUIRE(out.rows() == end - begin && out.cols() == b.cols(), "spmm_t: output shape mismatch");
}

using Index = std::int64_t;

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b, std::size_t b_cols) {
  SSVD_REQUIRE(a.cols() == b.rows(), "matmul: inner dimensions disagree");
  if (b_cols == kAllCols) b_cols = b.cols();
  SSVD_REQUIRE(b_cols <= b.cols(), "matmul: column count exceeds operand");
  DenseMatrix out(a.rows(), b_cols);
  const Index n = static_cast<Index>(b_cols);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j) {
    auto oc = out.col(static_cast<std::size_t>(j));
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double s = b(p, static_cast<std::size_t>(j));
      auto ac = a.col(p);
      for (std::size_t i = 0; i < oc.size(); ++i) oc[i] += ac[i] * s;
    }
  }
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  SSVD_REQUIRE(a.rows() == b.rows(), "matmul_tn: inner dimensions disagree");
  DenseMatrix out(a.cols(), b.cols());
  const Index n = static_cast<Index>(b.cols());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j) {
    auto bc = b.col(static_cast<std::size_t>(j));
    for (std::size_t i = 0; i < a.cols(); ++i) {
      auto ac = a.col(i);
      double s = 0.0;
      for (std::size_t p = 0; p < ac.size(); ++p) s += ac[p] * bc[p];
      out(i, static_cast<std::size_t>(j)) = s;
    }
  }
  return out;
}

void spmm_accumulate(DenseMatrix& y, const SparseChunk& c, std::size_t begin, std::size_t end, const DenseMatrix& b) {
  check_spmm(y, c, begin, end, b);
  const Index n = static_cast<Index>(b.cols());
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < n; ++k) {
    auto yc = y.col(static_cast<std::size_t>(k));
    for (std::size_t j = begin; j < end; ++j) {
      const double s = b(j - begin, static_cast<std::size_t>(k));
      auto rows = c.col_rows(j);
      auto vals = c.col_values(j);
      for (std::size_t p = 0; p < rows.size(); ++p) yc[rows[p]] += vals[p] * s;
    }
  }
}

void spmm_t_into(DenseMatrix& out, const SparseChunk& c, std::size_t begin, std::size_t end, const DenseMatrix& b) {
  check_spmm_t(out, c, begin, end, b);
  const Index n = static_cast<Index>(end - begin);
#pragma omp parallel for schedule(static)
  for (Index jj = 0; jj < n; ++jj) {
    const std::size_t j = begin + static_cast<std::size_t>(jj);
    auto rows = c.col_rows(j);
    auto vals = c.col_values(j);
    for (std::size_t k = 0; k < b.cols(); ++k) {
      auto bc = b.col(k);
      double s = 0.0;
      for (std::size_t p = 0; p < rows.size(); ++p) s += vals[p] * bc[rows[p]];
      out(static_cast<std::size_t>(jj), k) = s;
    }
  }
}

DenseMatrix spmm(const SparseChunk& c, const DenseMatrix& b) {
  DenseMatrix out(c.rows(), b.cols());
  spmm_accumulate(out, c, 0, c.cols(), b);
  return out;
}

DenseMatrix spmm_t(const SparseChunk& c, const DenseMatrix& b) {
  DenseMatrix out(c.cols(), b.cols());
  spmm_t_into(out, c, 0, c.cols(), b);
  return out;
}

void syrk_tn_accumulate(DenseMatrix& x, const DenseMatrix& w) {
  SSVD_REQUIRE(x.rows() == w.cols() && x.cols() == w.cols(), "syrk: output shape mismatch");
  const Index p = static_cast<Index>(w.cols());
  // Row a of the lower triangle costs a + 1 dot products.
#pragma omp parallel for schedule(dynamic, 8)
  for (Index a = 0; a < p; ++a) {
    auto wa = w.col(static_cast<std::size_t>(a));
    for (Index bcol = 0; bcol <= a; ++bcol) {
      auto wb = w.col(static_cast<std::size_t>(bcol));
      double s = 0.0;
      for (std::size_t t = 0; t < wa.size(); ++t) s += wa[t] * wb[t];
      x(static_cast<std::size_t>(a), static_cast<std::size_t>(bcol)) += s;
    }
  }
}

namespace serial {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b, std::size_t b_cols) {
  SSVD_REQUIRE(a.cols() == b.rows(), "matmul: inner dimensions disagree");
  if (b_cols == kAllCols) b_cols = b.cols();
  SSVD_REQUIRE(b_cols <= b.cols(), "matmul: column count exceeds operand");
  DenseMatrix out(a.rows(), b_cols);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b_cols; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(p, j);
      out(i, j) = s;
    }
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  SSVD_REQUIRE(a.rows() == b.rows(), "matmul_tn: inner dimensions disagree");
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.rows(); ++p) s += a(p, i) * b(p, j);
      out(i, j) = s;
    }
  return out;
}

void spmm_accumulate(DenseMatrix& y, const SparseChunk& c, std::size_t begin, std::size_t end, const DenseMatrix& b) {
  check_spmm(y, c, begin, end, b);
  for (std::size_t j = begin; j < end; ++j) {
    auto rows = c.col_rows(j);
    auto vals = c.col_values(j);
    for (std::size_t p = 0; p < rows.size(); ++p)
      for (std::size_t k = 0; k < b.cols(); ++k) y(rows[p], k) += vals[p] * b(j - begin, k);
  }
}

void spmm_t_into(DenseMatrix& out, const SparseChunk& c, std::size_t begin, std::size_t end, const DenseMatrix& b) {
  check_spmm_t(out, c, begin, end, b);
  for (std::size_t k = 0; k < b.cols(); ++k)
    for (std::size_t j = begin; j < end; ++j) {
      auto rows = c.col_rows(j);
      auto vals = c.col_values(j);
      double s = 0.0;
      for (std::size_t p = 0; p < rows.size(); ++p) s += vals[p] * b(rows[p], k);
      out(j - begin, k) = s;
    }
}

DenseMatrix spmm(const SparseChunk& c, const DenseMatrix& b) {
  DenseMatrix out(c.rows(), b.cols());
  spmm_accumulate(out, c, 0, c.cols(), b);
  return out;
}

DenseMatrix spmm_t(const SparseChunk& c, const DenseMatrix& b) {
  DenseMatrix out(c.cols(), b.cols());
  spmm_t_into(out, c, 0, c.cols(), b);
  return out;
}

void syrk_tn_accumulate(DenseMatrix& x, const DenseMatrix& w) {
  SSVD_REQUIRE(x.rows() == w.cols() && x.cols() == w.cols(), "syrk: output shape mismatch");
  for (std::size_t a = 0; a < w.cols(); ++a)
    for (std::size_t b = 0; b <= a; ++b) {
      double s = 0.0;
      for (std::size_t t = 0; t < w.rows(); ++t) s += w(t, a) * w(t, b);
      x(a, b) += s;
    }
}

}  // namespace serial
}  // namespace ssvd::kernels
