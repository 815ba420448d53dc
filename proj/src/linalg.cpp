#include "ssvd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "ssvd/errors.hpp"

namespace ssvd {
namespace {

double column_norm(std::span<const double> c) {
  double s = 0.0;
  for (double v : c) s += v * v;
  return std::sqrt(s);
}

// Applies I - beta v vᵀ (v stored as `v`, acting on rows [offset, m)) to the
// columns [first, last) of `w`.
void apply_reflector(DenseMatrix& w, std::span<const double> v, double beta, std::size_t offset, std::size_t first,
                     std::size_t last) {
  const auto n = static_cast<std::int64_t>(last - first);
#pragma omp parallel for schedule(static)
  for (std::int64_t jj = 0; jj < n; ++jj) {
    auto c = w.col(first + static_cast<std::size_t>(jj));
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * c[offset + i];
    const double f = beta * dot;
    for (std::size_t i = 0; i < v.size(); ++i) c[offset + i] -= f * v[i];
  }
}

struct Reflector {
  std::size_t column;  // column of the workspace holding v
  double beta;
  double sign;  // orientation fix applied to the matching Q column
};

}  // namespace

DenseMatrix orthonormalize(DenseMatrix y) {
  const std::size_t m = y.rows();
  const std::size_t p = y.cols();
  double largest = 0.0;
  for (std::size_t j = 0; j < p; ++j) largest = std::max(largest, column_norm(y.col(j)));
  if (!std::isfinite(largest)) throw DataError("orthonormalize: non-finite input");
  if (largest == 0.0 || m == 0) return DenseMatrix(m, 0);
  const double tol = kRankTolerance * largest;

  std::vector<Reflector> kept;
  for (std::size_t j = 0; j < p && kept.size() < m; ++j) {
    const std::size_t r = kept.size();
    auto x = y.col(j).subspan(r);
    const double alpha = column_norm(x);
    if (alpha <= tol) continue;
    // v = x + sign(x0) alpha e1 maps x to -sign(x0) alpha e1.
    const double s = x[0] >= 0.0 ? 1.0 : -1.0;
    x[0] += s * alpha;
    const double vtv = 2.0 * alpha * (alpha + std::abs(x[0] - s * alpha));
    const double beta = 2.0 / vtv;
    apply_reflector(y, x, beta, r, j + 1, p);
    kept.push_back({j, beta, -s});
  }

  const std::size_t rank = kept.size();
  DenseMatrix q(m, rank);
  for (std::size_t i = 0; i < rank; ++i) q(i, i) = 1.0;
  for (std::size_t t = rank; t-- > 0;) {
    auto v = std::span<const double>(y.col(kept[t].column)).subspan(t);
    apply_reflector(q, v, kept[t].beta, t, t, rank);
  }
  for (std::size_t t = 0; t < rank; ++t)
    if (kept[t].sign < 0.0)
      for (double& v : q.col(t)) v = -v;
  return q;
}

SymmetricEigen sym_eigh(const SymmetricMatrix& x) {
  const std::size_t n = x.dim();
  DenseMatrix a = x.full();
  if (!a.all_finite()) throw DataError("sym_eigh: non-finite entries");
  DenseMatrix v = DenseMatrix::identity(n);

  double norm_f = 0.0;
  for (double e : a.data()) norm_f += e * e;
  norm_f = std::sqrt(norm_f);
  const double target = 1e-14 * norm_f;

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && norm_f > 0.0; ++sweep) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = j + 1; i < n; ++i) off += 2.0 * a(i, j) * a(i, j);
    if (std::sqrt(off) <= target) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        double* cp = a.col(p).data();
        double* cq = a.col(q).data();
        // Rows p and q are handled below; splitting the range keeps the
        // loops branch-free.
        const auto rotate = [c, s, cp, cq](std::size_t lo, std::size_t hi) {
          for (std::size_t r = lo; r < hi; ++r) {
            const double arp = cp[r];
            const double arq = cq[r];
            cp[r] = c * arp - s * arq;
            cq[r] = s * arp + c * arq;
          }
        };
        rotate(0, p);
        rotate(p + 1, q);
        rotate(q + 1, n);
        for (std::size_t r = 0; r < n; ++r) {
          a(p, r) = cp[r];
          a(q, r) = cq[r];
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        auto vp = v.col(p);
        auto vq = v.col(q);
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = vp[r];
          const double vrq = vq[r];
          vp[r] = c * vrp - s * vrq;
          vq[r] = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  // Permute the columns of v in place (cycle walk) so only two n x n buffers
  // are ever live.
  std::vector<double> tmp(n);
  std::vector<bool> placed(n, false);
  for (std::size_t start = 0; start < n; ++start) {
    if (placed[start] || order[start] == start) continue;
    std::copy_n(v.col(start).begin(), n, tmp.begin());
    std::size_t k = start;
    while (order[k] != start) {
      std::copy_n(v.col(order[k]).begin(), n, v.col(k).begin());
      placed[k] = true;
      k = order[k];
    }
    std::copy_n(tmp.begin(), n, v.col(k).begin());
    placed[k] = true;
  }

  SymmetricEigen out;
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.values[k] = a(order[k], order[k]);
  out.vectors = std::move(v);
  normalize_column_signs(out.vectors);
  return out;
}

}  // namespace ssvd
