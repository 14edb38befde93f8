#pragma once

// Hermitian eigendecomposition.
//
// Route: unitary Householder reduction to tridiagonal form, a diagonal
// phase scrub that makes the subdiagonal real non-negative, then the
// classic implicit-shift QL iteration on the real tridiagonal matrix with
// rotations accumulated into the (complex) transformation.  Eigenvalues
// come back ascending with matching eigenvector columns.
//
// A values-only entry point skips all vector accumulation; truncation
// ladders and spectrum scans call it in bulk.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "matrix.hpp"

namespace opdef {

template <class T>
struct HermitianEigenResult {
  std::vector<double> values;  // ascending
  DenseMatrix<T> vectors;      // column j pairs with values[j]
};

namespace detail {

// Householder reduction A -> Q^H A Q = tridiag(d, e) for Hermitian A.
// On return d holds the (real) diagonal, e the real non-negative
// subdiagonal (e[i] couples i and i+1), and q, when non-null, the
// accumulated unitary Q.
template <class T>
void tridiagonalize(DenseMatrix<T> m, std::vector<double>& d, std::vector<double>& e,
                    DenseMatrix<T>* q) {
  const std::size_t n = m.rows;
  d.assign(n, 0.0);
  e.assign(n > 0 ? n - 1 : 0, 0.0);
  if (q) *q = DenseMatrix<T>::identity(n);
  if (n == 0) return;

  std::vector<T> v(n), u(n), w(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    // Column below the subdiagonal entry: x = m[k+1.., k].
    double xnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm2 += abs2_of(m.at(i, k));
    const double xnorm = std::sqrt(xnorm2);
    if (xnorm == 0.0) continue;
    double below = 0.0;  // magnitude below the first sub-entry
    for (std::size_t i = k + 2; i < n; ++i) below += abs2_of(m.at(i, k));
    if (std::sqrt(below) <= 1e-300) continue;  // already tridiagonal here

    const T x0 = m.at(k + 1, k);
    const double ax0 = abs_of(x0);
    const T phase = ax0 > 0.0 ? static_cast<T>(x0 * T(1.0 / ax0)) : T(1);
    const T alpha = static_cast<T>(-phase * T(xnorm));

    // v = x - alpha * e_1 (no cancellation with this phase choice).
    for (std::size_t i = 0; i < n; ++i) v[i] = T(0);
    for (std::size_t i = k + 1; i < n; ++i) v[i] = m.at(i, k);
    v[k + 1] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += abs2_of(v[i]);
    if (vnorm2 <= 1e-300) continue;
    const double beta = 2.0 / vnorm2;

    // Trailing block update B <- P B P with P = I - beta v v^H:
    // u = beta * B v;  kappa = (beta/2) * v^H u;  w = u - kappa v;
    // B <- B - v w^H - w v^H.
    for (std::size_t i = k + 1; i < n; ++i) {
      T acc(0);
      for (std::size_t j = k + 1; j < n; ++j) acc += m.at(i, j) * v[j];
      u[i] = acc * T(beta);
    }
    T vhu(0);
    for (std::size_t i = k + 1; i < n; ++i) vhu += conj_of(v[i]) * u[i];
    const T kappa = T(0.5 * beta) * vhu;  // real for Hermitian B
    for (std::size_t i = k + 1; i < n; ++i) w[i] = u[i] - kappa * v[i];
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        m.at(i, j) -= v[i] * conj_of(w[j]) + w[i] * conj_of(v[j]);
      }
    }

    // Eliminated column/row.
    m.at(k + 1, k) = alpha;
    m.at(k, k + 1) = conj_of(alpha);
    for (std::size_t i = k + 2; i < n; ++i) {
      m.at(i, k) = T(0);
      m.at(k, i) = T(0);
    }

    // Accumulate Q <- Q P (P acts on coordinates k+1..n-1).
    if (q) {
      for (std::size_t r = 0; r < n; ++r) {
        T acc(0);
        for (std::size_t j = k + 1; j < n; ++j) acc += q->at(r, j) * v[j];
        acc = acc * T(beta);
        for (std::size_t j = k + 1; j < n; ++j) q->at(r, j) -= acc * conj_of(v[j]);
      }
    }
  }

  // Phase scrub: D = diag(phi) with phi chosen so conj(phi_{i+1}) s_i phi_i = |s_i|.
  T phi = T(1);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = re_of(m.at(i, i));
    if (i + 1 < n) {
      const T s = m.at(i + 1, i);
      const double mabs = abs_of(s);
      e[i] = mabs;
      T next = phi;
      if (mabs > 0.0) next = static_cast<T>(s * phi * T(1.0 / mabs));
      if (q) {
        for (std::size_t r = 0; r < n; ++r) q->at(r, i + 1) = q->at(r, i + 1) * next;
      }
      phi = next;
    }
  }
  // Column 0 keeps phase 1; subsequent columns were scaled above.
}

// Implicit-shift QL on tridiag(d, e); rotations go into z when non-null.
template <class T>
void tqli(std::vector<double>& d, std::vector<double>& e, DenseMatrix<T>* z) {
  const std::size_t n = d.size();
  if (n == 0) return;
  e.resize(n, 0.0);  // e[n-1] used as workspace

  for (std::size_t l = 0; l < n; ++l) {
    std::size_t iter = 0;
    for (;;) {
      // Find the first negligible subdiagonal at or after l.
      std::size_t m = l;
      while (m + 1 < n) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd + 1e-300) break;
        ++m;
      }
      if (m == l) break;
      if (++iter > 64) throw std::runtime_error("hermitian_eigen: QL iteration cap exceeded");

      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (std::size_t ii = m; ii-- > l;) {
        double f = s * e[ii];
        const double b = c * e[ii];
        r = std::hypot(f, g);
        e[ii + 1] = r;
        if (r == 0.0) {
          d[ii + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[ii + 1] - p;
        const double t = (d[ii] - g) * s + 2.0 * c * b;
        p = s * t;
        d[ii + 1] = g + p;
        g = c * t - b;
        if (z) {
          for (std::size_t k = 0; k < z->rows; ++k) {
            const T f2 = z->at(k, ii + 1);
            z->at(k, ii + 1) = T(s) * z->at(k, ii) + T(c) * f2;
            z->at(k, ii) = T(c) * z->at(k, ii) - T(s) * f2;
          }
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

}  // namespace detail

// Full decomposition.  Requires A Hermitian within `hermitian_tol` (entrywise).
template <class T>
HermitianEigenResult<T> hermitian_eigen(const DenseMatrix<T>& a, double hermitian_tol = 1e-10) {
  if (a.rows != a.cols) throw std::invalid_argument("hermitian_eigen: matrix not square");
  if (!is_hermitian(a, hermitian_tol)) throw std::invalid_argument("hermitian_eigen: matrix not Hermitian");

  // Symmetrize exactly so rounding in the input cannot leak through.
  DenseMatrix<T> m = a;
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = i + 1; j < m.cols; ++j) {
      const T avg = T(0.5) * (m.at(i, j) + conj_of(m.at(j, i)));
      m.at(i, j) = avg;
      m.at(j, i) = conj_of(avg);
    }
    m.at(i, i) = T(re_of(m.at(i, i)));
  }

  std::vector<double> d, e;
  DenseMatrix<T> q;
  detail::tridiagonalize(m, d, e, &q);
  detail::tqli(d, e, &q);

  // Ascending sort with column permutation.
  const std::size_t n = d.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });

  HermitianEigenResult<T> out;
  out.values.resize(n);
  out.vectors = DenseMatrix<T>(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = d[perm[j]];
    for (std::size_t i = 0; i < n; ++i) out.vectors.at(i, j) = q.at(i, perm[j]);
  }
  return out;
}

// Eigenvalues only (ascending); skips all vector accumulation.
template <class T>
std::vector<double> hermitian_eigenvalues(const DenseMatrix<T>& a, double hermitian_tol = 1e-8) {
  if (a.rows != a.cols) throw std::invalid_argument("hermitian_eigenvalues: matrix not square");
  if (!is_hermitian(a, hermitian_tol)) throw std::invalid_argument("hermitian_eigenvalues: matrix not Hermitian");
  DenseMatrix<T> m = a;
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = i + 1; j < m.cols; ++j) {
      const T avg = T(0.5) * (m.at(i, j) + conj_of(m.at(j, i)));
      m.at(i, j) = avg;
      m.at(j, i) = conj_of(avg);
    }
    m.at(i, i) = T(re_of(m.at(i, i)));
  }
  std::vector<double> d, e;
  detail::tridiagonalize<T>(std::move(m), d, e, nullptr);
  detail::tqli<T>(d, e, nullptr);
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace opdef
