// Serial reference kernels vs their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "ssvd/kernels.hpp"
#include "ssvd/linalg.hpp"
#include "ssvd/random.hpp"
#include "ssvd/synthetic.hpp"

namespace {

using namespace ssvd;

SparseChunk test_chunk(std::size_t m, std::size_t n) {
  SyntheticSpec spec;
  spec.rows = m;
  spec.cols = n;
  SyntheticStream s(spec, n);
  return *s.next();
}

template <bool Parallel>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = gaussian_matrix(n, n, 1);
  const DenseMatrix b = gaussian_matrix(n, 64, 2);
  for (auto _ : state) {
    DenseMatrix c = Parallel ? kernels::matmul(a, b) : kernels::serial::matmul(a, b);
    benchmark::DoNotOptimize(c.data().data());
  }
}

template <bool Parallel>
void BM_MatmulTn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = gaussian_matrix(n, 64, 1);
  const DenseMatrix b = gaussian_matrix(n, 64, 2);
  for (auto _ : state) {
    DenseMatrix c = Parallel ? kernels::matmul_tn(a, b) : kernels::serial::matmul_tn(a, b);
    benchmark::DoNotOptimize(c.data().data());
  }
}

template <bool Parallel>
void BM_Spmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SparseChunk c = test_chunk(200, n);
  const DenseMatrix b = gaussian_matrix(n, 20, 3);
  for (auto _ : state) {
    DenseMatrix y = Parallel ? kernels::spmm(c, b) : kernels::serial::spmm(c, b);
    benchmark::DoNotOptimize(y.data().data());
  }
}

template <bool Parallel>
void BM_SpmmT(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SparseChunk c = test_chunk(200, n);
  const DenseMatrix b = gaussian_matrix(200, 20, 3);
  for (auto _ : state) {
    DenseMatrix y = Parallel ? kernels::spmm_t(c, b) : kernels::serial::spmm_t(c, b);
    benchmark::DoNotOptimize(y.data().data());
  }
}

template <bool Parallel>
void BM_Syrk(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix w = gaussian_matrix(n, 40, 4);
  for (auto _ : state) {
    DenseMatrix x(40, 40);
    if (Parallel)
      kernels::syrk_tn_accumulate(x, w);
    else
      kernels::serial::syrk_tn_accumulate(x, w);
    benchmark::DoNotOptimize(x.data().data());
  }
}

void BM_Orthonormalize(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix y = gaussian_matrix(n, 40, 5);
  for (auto _ : state) {
    DenseMatrix q = orthonormalize(y);
    benchmark::DoNotOptimize(q.data().data());
  }
}

void BM_SymEigh(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SymmetricMatrix x = SymmetricMatrix::from_dense(gaussian_matrix(n, n, 6));
  for (auto _ : state) {
    SymmetricEigen e = sym_eigh(x);
    benchmark::DoNotOptimize(e.values.data());
  }
}

}  // namespace

BENCHMARK(BM_Matmul<false>)->Arg(256)->Arg(1024);
BENCHMARK(BM_Matmul<true>)->Arg(256)->Arg(1024);
BENCHMARK(BM_MatmulTn<false>)->Arg(4096)->Arg(65536);
BENCHMARK(BM_MatmulTn<true>)->Arg(4096)->Arg(65536);
BENCHMARK(BM_Spmm<false>)->Arg(2000)->Arg(20000);
BENCHMARK(BM_Spmm<true>)->Arg(2000)->Arg(20000);
BENCHMARK(BM_SpmmT<false>)->Arg(2000)->Arg(20000);
BENCHMARK(BM_SpmmT<true>)->Arg(2000)->Arg(20000);
BENCHMARK(BM_Syrk<false>)->Arg(4096)->Arg(65536);
BENCHMARK(BM_Syrk<true>)->Arg(4096)->Arg(65536);
BENCHMARK(BM_Orthonormalize)->Arg(1000)->Arg(10000);
BENCHMARK(BM_SymEigh)->Arg(40)->Arg(200);

BENCHMARK_MAIN();
