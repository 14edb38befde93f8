#pragma once

// Singular value decomposition.
//
// `svd` is a one-sided Jacobi on the columns (high relative accuracy, the
// route of choice when singular *vectors* or tiny singular values matter).
// `singular_values` is the cheap values-only path through the Gram matrix
// and the tridiagonal eigensolver; truncation ladders and spectrum scans
// use it in bulk where sqrt-of-eigenvalue accuracy is ample.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "core.hpp"
#include "eigen.hpp"
#include "matrix.hpp"

namespace opdef {

template <class T>
struct SvdResult {
  DenseMatrix<T> u;                    // m x k, orthonormal columns (k = min(m, n))
  std::vector<double> singular_values; // descending, length k
  DenseMatrix<T> v;                    // n x k, orthonormal columns
};

namespace detail {

// One-sided Jacobi sweeps on an m x n matrix with m >= n.
template <class T>
SvdResult<T> svd_tall(const DenseMatrix<T>& a) {
  const std::size_t m = a.rows, n = a.cols;
  DenseMatrix<T> w = a;
  DenseMatrix<T> v = DenseMatrix<T>::identity(n);

  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0;
        T apq(0);
        for (std::size_t i = 0; i < m; ++i) {
          const T wp = w.at(i, p), wq = w.at(i, q);
          app += abs2_of(wp);
          aqq += abs2_of(wq);
          apq += conj_of(wp) * wq;
        }
        const double g = abs_of(apq);
        if (g <= 1e-15 * std::sqrt(app * aqq) + 1e-300) continue;
        rotated = true;

        // Diagonalize the phase-reduced real 2x2 Gram [[app, g], [g, aqq]].
        const T alpha = apq * T(1.0 / g);
        const double tau = (aqq - app) / (2.0 * g);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const T sabar = T(s) * conj_of(alpha);
        const T sa = T(s) * alpha;
        for (std::size_t i = 0; i < m; ++i) {
          const T wp = w.at(i, p), wq = w.at(i, q);
          w.at(i, p) = T(c) * wp - sabar * wq;
          w.at(i, q) = sa * wp + T(c) * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const T vp = v.at(i, p), vq = v.at(i, q);
          v.at(i, p) = T(c) * vp - sabar * vq;
          v.at(i, q) = sa * vp + T(c) * vq;
        }
      }
    }
    if (!rotated) break;
  }

  // Column norms are the singular values; sort descending.
  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += abs2_of(w.at(i, j));
    sv[j] = std::sqrt(acc);
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) { return sv[x] > sv[y]; });

  SvdResult<T> out;
  out.singular_values.resize(n);
  out.u = DenseMatrix<T>(m, n);
  out.v = DenseMatrix<T>(n, n);
  const double smax = sv.empty() ? 0.0 : sv[perm[0]];
  const double drop = static_cast<double>(std::max(m, n)) * 1e-16 * std::max(smax, 1e-300);

  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = perm[j];
    out.singular_values[j] = sv[src];
    for (std::size_t i = 0; i < n; ++i) out.v.at(i, j) = v.at(i, src);
    if (sv[src] > drop) {
      const double inv = 1.0 / sv[src];
      for (std::size_t i = 0; i < m; ++i) out.u.at(i, j) = w.at(i, src) * T(inv);
    }
  }
  // Complete left columns for (numerically) zero singular values by
  // Gram-Schmidt of canonical basis vectors against the columns built so far.
  for (std::size_t j = 0; j < n; ++j) {
    if (out.singular_values[j] > drop) continue;
    out.singular_values[j] = 0.0;
    for (std::size_t cand = 0; cand < m; ++cand) {
      std::vector<T> col(m, T(0));
      col[cand] = T(1);
      for (std::size_t jj = 0; jj < n; ++jj) {
        if (jj == j) continue;
        bool built = out.singular_values[jj] > 0.0 || jj < j;
        if (!built) continue;
        T ip(0);
        for (std::size_t i = 0; i < m; ++i) ip += col[i] * conj_of(out.u.at(i, jj));
        for (std::size_t i = 0; i < m; ++i) col[i] -= ip * out.u.at(i, jj);
      }
      double nrm = 0.0;
      for (std::size_t i = 0; i < m; ++i) nrm += abs2_of(col[i]);
      nrm = std::sqrt(nrm);
      if (nrm > 0.5) {  // canonical basis always yields one with norm near 1
        for (std::size_t i = 0; i < m; ++i) out.u.at(i, j) = col[i] * T(1.0 / nrm);
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

template <class T>
SvdResult<T> svd(const DenseMatrix<T>& a) {
  if (a.rows >= a.cols) return detail::svd_tall(a);
  SvdResult<T> s = detail::svd_tall(adjoint(a));
  SvdResult<T> out;
  out.u = std::move(s.v);
  out.v = std::move(s.u);
  out.singular_values = std::move(s.singular_values);
  return out;
}

// Descending singular values through the Gram matrix (values only).
template <class T>
std::vector<double> singular_values(const DenseMatrix<T>& a) {
  const bool tall = a.rows >= a.cols;
  const DenseMatrix<T>& base = a;
  DenseMatrix<T> gram;
  if (tall) {
    gram = matmul(adjoint(base), base);
  } else {
    gram = matmul(base, adjoint(base));
  }
  std::vector<double> ev = hermitian_eigenvalues(gram, 1e-6 * std::max(1.0, max_abs(gram)));
  std::vector<double> sv(ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i) {
    sv[i] = std::sqrt(std::max(0.0, ev[ev.size() - 1 - i]));
  }
  return sv;
}

// k-th smallest singular value (k zero-based), values-only route.
template <class T>
double kth_smallest_singular_value(const DenseMatrix<T>& a, std::size_t k) {
  std::vector<double> sv = singular_values(a);
  if (sv.empty()) return 0.0;
  const std::size_t idx = sv.size() > k ? sv.size() - 1 - k : 0;
  return sv[idx];
}

}  // namespace opdef
