#pragma once

#include <cstddef>
#include <cstdint>

#include "ssvd/dense.hpp"

namespace ssvd {

// Counter-based gaussian sampling.
//
// Entry t of a stream keyed by `seed` is computed independently of every other
// entry: the key mix_seed(seed, t) seeds a SplitMix64 sequence, successive
// pairs of 53-bit uniforms on (-1, 1) are fed to the Marsaglia polar method
// until one is accepted, and the first of the two normals is returned. The
// logarithm is evaluated by portable_log (IEEE add/mul/div only), so the output
// is bit-identical on any IEEE-754 platform compiled without FMA contraction.

/// One SplitMix64 step: advances `state` and returns the next output.
std::uint64_t splitmix64_next(std::uint64_t& state) noexcept;

/// Deterministic 64-bit hash of (seed, index). Used for per-chunk and
/// per-column sub-seeds and for the shuffle keys.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Natural logarithm for positive finite x using only exactly rounded
/// arithmetic (frexp + atanh series). Relative error below 2e-16.
double portable_log(double x) noexcept;

/// Uniform variate on [0, 1) at position `counter` of the stream keyed by `seed`.
double uniform_at(std::uint64_t seed, std::uint64_t counter) noexcept;

/// Standard normal variate at position `counter` of the stream keyed by `seed`.
double standard_normal_at(std::uint64_t seed, std::uint64_t counter) noexcept;

/// rows x cols matrix with entry (i, j) = standard_normal_at(seed, j * rows + i).
DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace ssvd
