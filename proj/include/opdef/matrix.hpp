#pragma once

// Dense row-major matrices over the scalar field.  Truncations of operators
// and all eigen/SVD kernels work on this type; sizes stay small (a few
// hundred), so no blocking or external BLAS is involved.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "vector.hpp"

namespace opdef {

template <class T>
struct DenseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<T> a;  // row-major, a[i*cols + j]

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, T(0)) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = T(1);
    return m;
  }

  T& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const T& at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  DenseVector<T> column(std::size_t j) const {
    DenseVector<T> v = DenseVector<T>::zeros(rows);
    for (std::size_t i = 0; i < rows; ++i) v.entries[i] = at(i, j);
    return v;
  }

  void set_column(std::size_t j, const DenseVector<T>& v) {
    for (std::size_t i = 0; i < rows; ++i) at(i, j) = v.at(i);
  }

  bool operator==(const DenseMatrix& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }
};

template <class T>
DenseVector<T> matvec(const DenseMatrix<T>& m, const DenseVector<T>& x) {
  DenseVector<T> r = DenseVector<T>::zeros(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    T acc(0);
    const T* row = &m.a[i * m.cols];
    const std::size_t n = std::min(m.cols, x.size());
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x.entries[j];
    r.entries[i] = acc;
  }
  return r;
}

template <class T>
DenseMatrix<T> matmul(const DenseMatrix<T>& x, const DenseMatrix<T>& y) {
  if (x.cols != y.rows) throw std::invalid_argument("matmul: inner dimensions differ");
  DenseMatrix<T> r(x.rows, y.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t k = 0; k < x.cols; ++k) {
      const T xv = x.at(i, k);
      if (xv == T(0)) continue;
      const T* yrow = &y.a[k * y.cols];
      T* rrow = &r.a[i * r.cols];
      for (std::size_t j = 0; j < y.cols; ++j) rrow[j] += xv * yrow[j];
    }
  }
  return r;
}

// Conjugate transpose.
template <class T>
DenseMatrix<T> adjoint(const DenseMatrix<T>& m) {
  DenseMatrix<T> r(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) r.at(j, i) = conj_of(m.at(i, j));
  return r;
}

template <class T>
DenseMatrix<T> msub(const DenseMatrix<T>& x, const DenseMatrix<T>& y) {
  if (x.rows != y.rows || x.cols != y.cols) throw std::invalid_argument("msub: shape mismatch");
  DenseMatrix<T> r(x.rows, x.cols);
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] - y.a[i];
  return r;
}

template <class T>
double max_abs(const DenseMatrix<T>& m) {
  double best = 0.0;
  for (const T& v : m.a) best = std::max(best, abs_of(v));
  return best;
}

template <class T>
double frobenius(const DenseMatrix<T>& m) {
  double acc = 0.0;
  for (const T& v : m.a) acc += abs2_of(v);
  return std::sqrt(acc);
}

template <class T>
bool is_hermitian(const DenseMatrix<T>& m, double tol) {
  if (m.rows != m.cols) return false;
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = i; j < m.cols; ++j)
      if (abs_of(static_cast<T>(m.at(i, j) - conj_of(m.at(j, i)))) > tol) return false;
  return true;
}

template <class T>
DenseMatrix<cplx> to_complex(const DenseMatrix<T>& m) {
  DenseMatrix<cplx> r(m.rows, m.cols);
  for (std::size_t i = 0; i < m.a.size(); ++i) r.a[i] = cplx(re_of(m.a[i]), im_of(m.a[i]));
  return r;
}

}  // namespace opdef
