#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "ssvd/kernels.hpp"
#include "ssvd/linalg.hpp"
#include "ssvd/memory.hpp"
#include "ssvd/oracle.hpp"
#include "ssvd/p2.hpp"
#include "ssvd/random.hpp"
#include "test_util.hpp"

using namespace ssvd;
using testutil::max_abs;
using testutil::to_eigen;

namespace {

// Plain triple loop with the inner index ascending.
DenseMatrix naive_product(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) {
      double s = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t)
        if (a(i, t) != 0.0) s += a(i, t) * b(t, j);
      c(i, j) = s;
    }
  return c;
}

DecompConfig config(std::size_t k, std::size_t l, std::size_t q, std::uint64_t seed = 0) {
  DecompConfig cfg;
  cfg.k = k;
  cfg.l = l;
  cfg.q = q;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("sample_pass") {
  SUBCASE("zero stream") {
    auto s = testutil::chunked(DenseMatrix(5, 12), 4);
    CHECK(sample_pass(s, 3, 1) == DenseMatrix(5, 3));
  }
  SUBCASE("single chunk equals A O exactly") {
    const DenseMatrix a = testutil::random_dense(6, 9, 1, 0.6);
    auto s = testutil::chunked(a, 9);
    const DenseMatrix o = gaussian_matrix(9, 4, chunk_seed(17, 0));
    CHECK(sample_pass(s, 4, 17) == naive_product(a, o));
  }
  SUBCASE("chunks of 3 with matched blocks") {
    const DenseMatrix a = testutil::random_dense(6, 9, 1, 0.6);
    auto one = testutil::chunked(a, 9);
    auto three = testutil::chunked(a, 3);
    DenseMatrix o(9, 4);
    for (std::size_t b = 0; b < 3; ++b) {
      const DenseMatrix block = gaussian_matrix(3, 4, chunk_seed(17, b));
      for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t i = 0; i < 3; ++i) o(3 * b + i, j) = block(i, j);
    }
    const Eigen::MatrixXd ref = to_eigen(a) * to_eigen(o);
    const DenseMatrix y3 = sample_pass(three, 4, 17);
    CHECK(max_abs(to_eigen(y3) - ref) <= 1e-13 * max_abs(ref));
    // the single-chunk run draws one 9-row block, so it differs from the three-block run
    CHECK_FALSE(sample_pass(one, 4, 17) == y3);
  }
  SUBCASE("one pass") {
    auto s = testutil::chunked(testutil::random_dense(6, 9, 1), 2);
    PassCounter pc(s);
    sample_pass(pc, 2, 0);
    CHECK(count_passes(pc) == 1);
  }
  SUBCASE("row mismatch") {
    DenseMatrix y(3, 2);
    CHECK_THROWS_AS(accumulate_sample(y, SparseChunk::from_dense(DenseMatrix(4, 2)), 0), ContractError);
  }
  SUBCASE("per-column sampling follows the key") {
    const DenseMatrix a = testutil::random_dense(6, 10, 4, 0.7);
    std::vector<std::size_t> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(5);
    std::shuffle(perm.begin(), perm.end(), rng);
    DenseMatrix b(6, 10);
    for (std::size_t j = 0; j < 10; ++j)
      for (std::size_t i = 0; i < 6; ++i) b(i, j) = a(i, perm[j]);
    auto sa = testutil::chunked(a, 3);
    auto sb = testutil::chunked(b, 4);
    const DenseMatrix ya = sample_pass(sa, 3, 8, Sampling::per_column);
    const DenseMatrix yb = sample_pass(sb, 3, 8, Sampling::per_column, [&](std::uint64_t j) { return perm[j]; });
    CHECK(max_abs(to_eigen(ya) - to_eigen(yb)) <= 1e-13 * max_abs(to_eigen(ya)));
  }
}

TEST_CASE("power_pass") {
  const DenseMatrix y = testutil::random_dense(3, 2, 9);
  SUBCASE("identity") {
    auto s = testutil::chunked(DenseMatrix::identity(3), 3);
    CHECK(power_pass(s, y) == y);
  }
  SUBCASE("diag(2,1)") {
    const DenseMatrix y2 = testutil::random_dense(2, 3, 9);
    auto s = testutil::chunked(DenseMatrix::from_rows({{2, 0}, {0, 1}}), 2);
    const DenseMatrix out = power_pass(s, y2);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(out(0, j) == 4.0 * y2(0, j));
      CHECK(out(1, j) == y2(1, j));
    }
  }
  SUBCASE("random 8x20 against dense") {
    const DenseMatrix a = testutil::random_dense(8, 20, 10, 0.4), y8 = testutil::random_dense(8, 3, 11);
    auto s = testutil::chunked(a, 6);
    const Eigen::MatrixXd ae = to_eigen(a), ref = ae * (ae.transpose() * to_eigen(y8));
    CHECK(max_abs(to_eigen(power_pass(s, y8)) - ref) <= 1e-12 * max_abs(ref));
  }
}

TEST_CASE("covariance_pass") {
  SUBCASE("zero stream") {
    auto s = testutil::chunked(DenseMatrix(4, 7), 3);
    CHECK(covariance_pass(s, testutil::from_eigen(testutil::random_orthonormal(4, 2, 1))).full() == DenseMatrix(2, 2));
  }
  SUBCASE("A = Q") {
    const DenseMatrix q = testutil::from_eigen(testutil::random_orthonormal(7, 3, 2));
    auto s = testutil::chunked(q, 3);
    const Eigen::MatrixXd x = to_eigen(covariance_pass(s, q).full());
    CHECK(max_abs(x - Eigen::MatrixXd::Identity(3, 3)) <= 1e-12);
  }
  SUBCASE("random 10x30 against dense") {
    const DenseMatrix a = testutil::random_dense(10, 30, 3, 0.5);
    const DenseMatrix q = testutil::from_eigen(testutil::random_orthonormal(10, 4, 4));
    auto s = testutil::chunked(a, 7);
    const Eigen::MatrixXd b = to_eigen(q).transpose() * to_eigen(a), ref = b * b.transpose();
    const auto x = covariance_pass(s, q);
    CHECK(max_abs(to_eigen(x.full()) - ref) <= 1e-12 * max_abs(ref));
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(x(i, j) == x(j, i));
  }
}

TEST_CASE("finalize") {
  const DenseMatrix q = DenseMatrix::from_rows({{1, 0}, {0, 1}, {0, 0}});
  SymmetricMatrix x(2);
  x.set(0, 0, 9.0);
  x.set(1, 1, 4.0);
  SUBCASE("diagonal problem") {
    const auto d = finalize(q, x, 2);
    CHECK(d.S.values() == std::vector<double>{3.0, 2.0});
    CHECK(d.U == q);
  }
  SUBCASE("truncation") {
    const auto d = finalize(q, x, 1);
    CHECK(d.S.values() == std::vector<double>{3.0});
    CHECK(d.U == q.leading_cols(1));
  }
  SUBCASE("p < k") { CHECK_THROWS_AS(finalize(q, x, 3), ContractError); }
  SUBCASE("negative eigenvalues clamp to zero") {
    SymmetricMatrix neg(2);
    neg.set(0, 0, 1.0);
    neg.set(1, 1, -1e-18);
    CHECK(finalize(q, neg, 2).S.values() == std::vector<double>{1.0, 0.0});
  }
}

TEST_CASE("decompose_p2") {
  SUBCASE("zero matrix") {
    for (std::size_t q : {0, 1, 3}) {
      auto s = testutil::chunked(DenseMatrix(6, 20), 7);
      PassCounter pc(s);
      const auto d = decompose_p2(pc, config(2, 1, q));
      CHECK(count_passes(pc) == 2 + q);
      CHECK(d.passes == 2 + q);
      CHECK(d.S.empty());
      CHECK(d.rank_deficient);
      CHECK(d.U.rows() == 6);
    }
  }
  SUBCASE("rank-2 10x50 with sigma (5, 2)") {
    const DenseMatrix a = testutil::planted(10, 50, {5.0, 2.0}, 1);
    auto s = testutil::chunked(a, 8);
    const auto d = decompose_p2(s, config(2, 2, 1, 3));
    REQUIRE(d.S.size() == 2);
    CHECK(std::abs(d.S[0] - 5.0) <= 1e-10 * 5.0);
    CHECK(std::abs(d.S[1] - 2.0) <= 1e-10 * 2.0);
    CHECK_FALSE(d.rank_deficient);
  }
  SUBCASE("random 12x40, q=3, l=k") {
    const DenseMatrix a = testutil::random_dense(12, 40, 2);
    auto s = testutil::chunked(a, 9);
    const auto oracle = oracle_decompose(s, 12);
    const auto d = decompose_p2(s, config(6, 6, 3, 4));
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(d.S[i] - oracle.S[i]) <= 1e-6 * oracle.S[i]);
    const Eigen::MatrixXd u = to_eigen(d.U);
    CHECK(max_abs(u.transpose() * u - Eigen::MatrixXd::Identity(6, 6)) <= 1e-10);
  }
  SUBCASE("pass accounting for q in {0, 1, 3}") {
    const DenseMatrix a = testutil::random_dense(8, 30, 3, 0.5);
    for (std::size_t q : {0, 1, 3}) {
      auto s = testutil::chunked(a, 7);
      PassCounter pc(s);
      decompose_p2(pc, config(2, 2, q));
      CHECK(count_passes(pc) == 2 + q);
    }
  }
  SUBCASE("underestimation") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto s = testutil::chunked(testutil::random_dense(15, 60, 100 + seed, 0.3), 11);
      const auto oracle = oracle_decompose(s, 15);
      for (std::size_t q : {0, 1}) {
        const auto d = decompose_p2(s, config(4, 2, q, seed));
        for (std::size_t i = 0; i < d.S.size(); ++i) CHECK(d.S[i] <= oracle.S[i] + 1e-9 * oracle.S[0]);
      }
    }
  }
  SUBCASE("non-reopenable stream is refused before any work") {
    auto inner = testutil::chunked(testutil::random_dense(5, 10, 1), 3);
    testutil::OneShotStream once(inner);
    PassCounter pc(once);
    CHECK_THROWS_AS(decompose_p2(pc, config(2, 0, 0)), ConfigError);
    CHECK(pc.chunks_in_current_pass() == 0);
  }
  SUBCASE("invalid configurations") {
    auto s = testutil::chunked(testutil::random_dense(5, 10, 1), 3);
    CHECK_THROWS_AS(decompose_p2(s, config(0, 0, 0)), ConfigError);
    CHECK_THROWS_AS(decompose_p2(s, config(3, 3, 0)), ConfigError);
    auto cfg = config(2, 0, 0);
    cfg.chunk_size = 0;
    CHECK_THROWS_AS(decompose_p2(s, cfg), ConfigError);
  }
  SUBCASE("seed stability") {
    const DenseMatrix a = testutil::random_dense(10, 40, 5, 0.5);
    auto s1 = testutil::chunked(a, 9), s2 = testutil::chunked(a, 9);
    const auto d1 = decompose_p2(s1, config(3, 2, 1, 42)), d2 = decompose_p2(s2, config(3, 2, 1, 42));
    CHECK(d1.S == d2.S);
    CHECK(d1.U == d2.U);
  }
  SUBCASE("re-orthonormalized power iterations agree with the plain ones") {
    const DenseMatrix a = testutil::planted(20, 80, {9, 7, 5, 3, 1, 0.5}, 6);
    auto s = testutil::chunked(a, 16);
    auto cfg = config(3, 3, 2, 1);
    const auto plain = decompose_p2(s, cfg);
    cfg.reorthonormalize = true;
    const auto stable = decompose_p2(s, cfg);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(plain.S[i] - stable.S[i]) <= 1e-10 * plain.S[0]);
  }
  SUBCASE("rechunking through the config") {
    const DenseMatrix a = testutil::random_dense(8, 30, 6);
    auto s = testutil::chunked(a, 30);
    auto cfg = config(2, 2, 1);
    cfg.chunk_size = 4;
    PassCounter pc(s);
    const auto d = decompose_p2(pc, cfg);
    CHECK(count_passes(pc) == 3);
    CHECK(d.observations == 30);
  }
  SUBCASE("paper-scale configuration grid is valid at 100000 features") {
    for (std::size_t l : {0, 200, 400})
      for (std::size_t q : {0, 1, 3}) CHECK_NOTHROW(config(400, l, q).validate(100000));
  }
}

TEST_CASE("P2 dense working set") {
  const std::size_t m = 40, chunk = 25, k = 4, l = 4;
  const DenseMatrix a = testutil::random_dense(m, chunk * 100, 7, 0.05);
  auto s = testutil::chunked(a, chunk);
  const std::size_t p = k + l;
  for (std::size_t q : {0, 2}) {
    PeakScope scope(MemoryKind::dense);
    const auto d = decompose_p2(s, config(k, l, q));
    const std::size_t bound = 3 * m * p + p * p;
    CHECK(d.peak_dense_values <= bound);
    CHECK(scope.peak_bytes() / sizeof(double) <= bound + m * k);  // plus the returned U
  }
}
