#include <cmath>
#include <limits>

#include "doctest.h"
#include "ssvd/errors.hpp"
#include "ssvd/kernels.hpp"
#include "ssvd/linalg.hpp"
#include "ssvd/random.hpp"
#include "test_util.hpp"

using namespace ssvd;
using testutil::to_eigen;

namespace {

// Modified Gram-Schmidt with one reorthogonalisation pass, straight from the textbook.
Eigen::MatrixXd mgs_basis(const Eigen::MatrixXd& y) {
  Eigen::MatrixXd q(y.rows(), 0);
  const double tol = 1e-12 * y.colwise().norm().maxCoeff();
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    Eigen::VectorXd v = y.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < q.cols(); ++i) v -= q.col(i).dot(v) * q.col(i);
    if (v.norm() <= tol) continue;
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = v / v.norm();
  }
  return q;
}

double orthonormality_error(const DenseMatrix& q) {
  const Eigen::MatrixXd e = to_eigen(q);
  return testutil::max_abs(e.transpose() * e - Eigen::MatrixXd::Identity(e.cols(), e.cols()));
}

}  // namespace

TEST_CASE("gaussian_matrix") {
  SUBCASE("empty") {
    const auto g = gaussian_matrix(0, 5, 7);
    CHECK(g.rows() == 0);
    CHECK(g.cols() == 5);
    CHECK(g.size() == 0);
  }
  SUBCASE("deterministic") { CHECK(gaussian_matrix(3, 2, 42) == gaussian_matrix(3, 2, 42)); }
  SUBCASE("different seeds differ") { CHECK_FALSE(gaussian_matrix(3, 2, 42) == gaussian_matrix(3, 2, 43)); }
  SUBCASE("moments of 10^6 draws") {
    const auto g = gaussian_matrix(1000, 1000, 1);
    double sum = 0.0, sq = 0.0;
    for (double v : g.data()) sum += v;
    const double mean = sum / static_cast<double>(g.size());
    for (double v : g.data()) sq += (v - mean) * (v - mean);
    const double var = sq / static_cast<double>(g.size() - 1);
    CHECK(std::abs(mean) <= 0.004);
    CHECK(std::abs(var - 1.0) <= 0.01);
  }
  SUBCASE("entries are addressable by counter") {
    const auto g = gaussian_matrix(4, 3, 9);
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < 4; ++i) CHECK(g(i, j) == standard_normal_at(9, j * 4 + i));
  }
}

TEST_CASE("splitmix64 reference vector") {
  std::uint64_t s = 1234567;
  const std::uint64_t expected[] = {6457827717110365317ull, 3203168211198807973ull, 9817491932198370423ull,
                                    4593380528125082431ull, 16408922859458223821ull};
  for (auto e : expected) CHECK(splitmix64_next(s) == e);
}

TEST_CASE("portable_log") {
  for (double x : {1e-300, 1e-10, 0.1, 0.5, 1.0, 1.5, 2.0, 10.0, 12345.678, 1e300}) {
    CHECK(std::abs(portable_log(x) - std::log(x)) <= 4e-16 * std::max(1.0, std::abs(std::log(x))));
  }
  CHECK(portable_log(1.0) == 0.0);
}

TEST_CASE("orthonormalize") {
  SUBCASE("identity") { CHECK(orthonormalize(DenseMatrix::identity(3)) == DenseMatrix::identity(3)); }
  SUBCASE("single column") {
    const auto q = orthonormalize(DenseMatrix::from_rows({{2}, {0}, {0}}));
    REQUIRE(q.cols() == 1);
    CHECK(std::abs(q(0, 0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(q(1, 0) == 0.0);
    CHECK(q(2, 0) == 0.0);
  }
  SUBCASE("projector matches Gram-Schmidt") {
    const DenseMatrix y = DenseMatrix::from_rows({{1, 1}, {1, 0}, {0, 1}});
    const auto q = orthonormalize(y);
    REQUIRE(q.cols() == 2);
    CHECK(orthonormality_error(q) <= 1e-12);
    const Eigen::MatrixXd qe = to_eigen(q), ref = mgs_basis(to_eigen(y));
    CHECK(testutil::max_abs(qe * qe.transpose() - ref * ref.transpose()) <= 1e-12);
  }
  SUBCASE("zero input gives no columns") {
    const auto q = orthonormalize(DenseMatrix(5, 3));
    CHECK(q.rows() == 5);
    CHECK(q.cols() == 0);
  }
  SUBCASE("dependent columns are dropped") {
    DenseMatrix y = testutil::random_dense(6, 4, 3);
    for (std::size_t i = 0; i < 6; ++i) {
      y(i, 2) = 2.0 * y(i, 0) - y(i, 1);
      y(i, 3) = 0.0;
    }
    const auto q = orthonormalize(y);
    CHECK(q.cols() == 2);
    CHECK(orthonormality_error(q) <= 1e-12);
  }
  SUBCASE("orientation follows the generating columns") {
    const DenseMatrix y = testutil::random_dense(8, 3, 11);
    const auto q = orthonormalize(y);
    REQUIRE(q.cols() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < 8; ++i) dot += q(i, j) * y(i, j);
      CHECK(dot > 0.0);
    }
  }
}

TEST_CASE("sym_eigh") {
  SUBCASE("diagonal") {
    const auto e = sym_eigh(SymmetricMatrix::from_dense(DenseMatrix::from_rows({{3, 0}, {0, 1}})));
    CHECK(e.values == std::vector<double>{3.0, 1.0});
    CHECK(e.vectors == DenseMatrix::identity(2));
  }
  SUBCASE("zero") {
    const auto e = sym_eigh(SymmetricMatrix(2));
    CHECK(e.values == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("2x2 by hand") {
    const auto e = sym_eigh(SymmetricMatrix::from_dense(DenseMatrix::from_rows({{2, 1}, {1, 2}})));
    CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-14));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(std::abs(e.vectors(0, 0)) - r) <= 1e-14);
    CHECK(std::abs(e.vectors(0, 0) - e.vectors(1, 0)) <= 1e-14);
    CHECK(std::abs(e.vectors(0, 1) + e.vectors(1, 1)) <= 1e-14);
  }
  SUBCASE("sign convention") {
    const DenseMatrix g = testutil::random_dense(7, 7, 5);
    const auto e = sym_eigh(SymmetricMatrix::from_dense(g));
    for (std::size_t j = 0; j < 7; ++j) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < 7; ++i)
        if (std::abs(e.vectors(i, j)) > std::abs(e.vectors(best, j))) best = i;
      CHECK(e.vectors(best, j) > 0.0);
    }
  }
  SUBCASE("matches Eigen on a random matrix") {
    const DenseMatrix g = testutil::random_dense(12, 12, 8);
    const auto x = SymmetricMatrix::from_dense(g);
    const auto e = sym_eigh(x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(x.full()));
    for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(e.values[i] - ref.eigenvalues()(11 - i)) <= 1e-12);
  }
  SUBCASE("non-finite input") {
    SymmetricMatrix x(2);
    x.set(0, 1, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(sym_eigh(x), DataError);
    x.set(0, 1, std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(sym_eigh(x), DataError);
  }
}

TEST_CASE("products") {
  SUBCASE("identity times B is B bitwise") {
    const DenseMatrix b = testutil::random_dense(5, 4, 1);
    CHECK(kernels::matmul(DenseMatrix::identity(5), b) == b);
    CHECK(kernels::matmul_tn(DenseMatrix::identity(5), b) == b);
  }
  SUBCASE("single sparse entry") {
    DenseMatrix d(4, 1);
    d(2, 0) = 5.0;
    const auto c = SparseChunk::from_dense(d);
    const auto y = kernels::spmm(c, DenseMatrix::from_rows({{3}}));
    CHECK(y == DenseMatrix::from_rows({{0}, {0}, {15}, {0}}));
  }
  SUBCASE("7x5 sparse chunk against dense oracle") {
    const DenseMatrix a = testutil::random_dense(7, 5, 21, 0.4);
    const auto c = SparseChunk::from_dense(a);
    const DenseMatrix b = testutil::random_dense(5, 3, 22), bt = testutil::random_dense(7, 3, 23);
    const Eigen::MatrixXd y = to_eigen(a) * to_eigen(b), yt = to_eigen(a).transpose() * to_eigen(bt);
    CHECK(testutil::max_abs(to_eigen(kernels::spmm(c, b)) - y) <= 1e-13 * std::max(1.0, testutil::max_abs(y)));
    CHECK(testutil::max_abs(to_eigen(kernels::spmm_t(c, bt)) - yt) <= 1e-13 * std::max(1.0, testutil::max_abs(yt)));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(kernels::matmul(DenseMatrix(2, 3), DenseMatrix(2, 3)), ContractError);
    CHECK_THROWS_AS(kernels::matmul_tn(DenseMatrix(2, 3), DenseMatrix(3, 3)), ContractError);
    const auto c = SparseChunk::from_dense(DenseMatrix(3, 4));
    CHECK_THROWS_AS(kernels::spmm(c, DenseMatrix(3, 1)), ContractError);
    CHECK_THROWS_AS(kernels::spmm_t(c, DenseMatrix(4, 1)), ContractError);
  }
  SUBCASE("random shapes up to 20") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> dim(1, 20);
    for (int t = 0; t < 200; ++t) {
      const std::size_t m = dim(rng), n = dim(rng), p = dim(rng);
      const DenseMatrix a = testutil::random_dense(m, n, 1000 + t, 0.3);
      const auto c = SparseChunk::from_dense(a);
      const DenseMatrix b = testutil::random_dense(n, p, 5000 + t), bt = testutil::random_dense(m, p, 9000 + t);
      const Eigen::MatrixXd y = to_eigen(a) * to_eigen(b), yt = to_eigen(a).transpose() * to_eigen(bt);
      const double s = std::max(1.0, testutil::max_abs(y)), st = std::max(1.0, testutil::max_abs(yt));
      CHECK(testutil::max_abs(to_eigen(kernels::spmm(c, b)) - y) <= 1e-13 * s);
      CHECK(testutil::max_abs(to_eigen(kernels::spmm_t(c, bt)) - yt) <= 1e-13 * st);
      CHECK(testutil::max_abs(to_eigen(kernels::matmul(a, b)) - y) <= 1e-13 * s);
    }
  }
}

TEST_CASE("parallel kernels are bitwise equal to the serial reference") {
  const DenseMatrix a = testutil::random_dense(300, 120, 1), b = testutil::random_dense(120, 40, 2);
  const DenseMatrix big = testutil::random_dense(300, 40, 3);
  const auto c = SparseChunk::from_dense(testutil::random_dense(300, 500, 4, 0.05));
  const DenseMatrix cb = testutil::random_dense(500, 40, 5);
  CHECK(kernels::matmul(a, b) == kernels::serial::matmul(a, b));
  CHECK(kernels::matmul(a, b, 17) == kernels::serial::matmul(a, b, 17));
  CHECK(kernels::matmul_tn(a, big) == kernels::serial::matmul_tn(a, big));
  CHECK(kernels::spmm(c, cb) == kernels::serial::spmm(c, cb));
  CHECK(kernels::spmm_t(c, big) == kernels::serial::spmm_t(c, big));

  DenseMatrix y1 = big, y2 = big;
  kernels::spmm_accumulate(y1, c, 100, 300, testutil::random_dense(200, 40, 6));
  kernels::serial::spmm_accumulate(y2, c, 100, 300, testutil::random_dense(200, 40, 6));
  CHECK(y1 == y2);

  DenseMatrix o1(200, 40), o2(200, 40);
  kernels::spmm_t_into(o1, c, 50, 250, big);
  kernels::serial::spmm_t_into(o2, c, 50, 250, big);
  CHECK(o1 == o2);

  DenseMatrix x1(40, 40), x2(40, 40);
  kernels::syrk_tn_accumulate(x1, big);
  kernels::serial::syrk_tn_accumulate(x2, big);
  CHECK(x1 == x2);
}

TEST_CASE("invariants on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(1, 30);
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = dim(rng), p = std::min(m, dim(rng));
    const DenseMatrix y = testutil::random_dense(m, p, 77000 + t);
    const auto q = orthonormalize(y);
    CHECK(orthonormality_error(q) <= 1e-12);
    const Eigen::MatrixXd qe = to_eigen(q), ye = to_eigen(y);
    CHECK(testutil::max_abs(qe * (qe.transpose() * ye) - ye) <= 1e-10 * testutil::max_abs(ye));

    const std::size_t d = dim(rng);
    const auto x = SymmetricMatrix::from_dense(testutil::random_dense(d, d, 88000 + t));
    const auto e = sym_eigh(x);
    const Eigen::MatrixXd xe = to_eigen(x.full()), ve = to_eigen(e.vectors);
    Eigen::VectorXd lam(d);
    for (std::size_t i = 0; i < d; ++i) lam(i) = e.values[i];
    CHECK(testutil::max_abs(xe * ve - ve * lam.asDiagonal()) <= 1e-10 * testutil::max_abs(xe));
    CHECK(orthonormality_error(e.vectors) <= 1e-12);
    CHECK(std::is_sorted(e.values.rbegin(), e.values.rend()));
  }
}

TEST_CASE("spectrum and matrix helpers") {
  CHECK_THROWS_AS(Spectrum({1.0, 2.0}), ContractError);
  CHECK_THROWS_AS(Spectrum({1.0, -0.5}), ContractError);
  const Spectrum s({3.0, 2.0});
  CHECK(s.truncated(1).values() == std::vector<double>{3.0});
  CHECK(s.padded(4) == std::vector<double>{3.0, 2.0, 0.0, 0.0});
  const auto x = SymmetricMatrix::from_lower(DenseMatrix::from_rows({{1, 9}, {2, 3}}));
  CHECK(x(0, 1) == 2.0);
  CHECK(x(1, 0) == 2.0);
  DenseMatrix m = DenseMatrix::from_rows({{1, -1}, {-3, 2}});
  normalize_column_signs(m);
  CHECK(m == DenseMatrix::from_rows({{-1, -1}, {3, 2}}));
}
