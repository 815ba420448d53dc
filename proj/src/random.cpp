#include "ssvd/random.hpp"

#include <cmath>

namespace ssvd {

std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64_next(s);
  std::uint64_t t = a ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  return splitmix64_next(t);
}

double portable_log(double x) noexcept {
  constexpr double kLn2Hi = 6.93147180369123816490e-01;  // upper 32 bits of ln 2
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  constexpr double kSqrtHalf = 0.70710678118654752440;
  int e = 0;
  double m = std::frexp(x, &e);  // x = m * 2^e, m in [0.5, 1)
  if (m < kSqrtHalf) {
    m *= 2.0;
    --e;
  }
  // ln m = 2 atanh(z), |z| <= 0.1716, z^2 <= 0.0295; 13 odd terms reach 1e-20.
  const double z = (m - 1.0) / (m + 1.0);
  const double z2 = z * z;
  double p = 1.0 / 25.0;
  for (int k = 11; k >= 0; --k) p = p * z2 + 1.0 / static_cast<double>(2 * k + 1);
  const double de = static_cast<double>(e);
  return (de * kLn2Hi) + ((2.0 * z * p) + de * kLn2Lo);
}

double uniform_at(std::uint64_t seed, std::uint64_t counter) noexcept {
  std::uint64_t state = mix_seed(seed, counter);
  return static_cast<double>(splitmix64_next(state) >> 11) * (1.0 / 9007199254740992.0);
}

double standard_normal_at(std::uint64_t seed, std::uint64_t counter) noexcept {
  std::uint64_t state = mix_seed(seed, counter);
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  for (;;) {
    const double u = static_cast<double>(splitmix64_next(state) >> 11) * kScale * 2.0 - 1.0;
    const double v = static_cast<double>(splitmix64_next(state) >> 11) * kScale * 2.0 - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * portable_log(s) / s);
  }
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  DenseMatrix out(rows, cols);
  const auto n_cols = static_cast<std::int64_t>(cols);
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < n_cols; ++j) {
    auto c = out.col(static_cast<std::size_t>(j));
    const std::uint64_t base = static_cast<std::uint64_t>(j) * rows;
    for (std::size_t i = 0; i < rows; ++i) c[i] = standard_normal_at(seed, base + i);
  }
  return out;
}

}  // namespace ssvd
