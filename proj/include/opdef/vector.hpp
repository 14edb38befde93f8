#pragma once

// Finitely supported vectors in l^2.
//
// A DenseVector stores coordinates 0..size()-1 explicitly; every coordinate
// beyond is an implicit exact zero.  Two vectors that differ only by
// trailing zeros represent the same point of l^2, so semantic comparisons
// go through `same_vector`, while operator== is bitwise (used by the
// serialization round-trip tests).

#include <algorithm>
#include <cstddef>
#include <vector>

#include "core.hpp"

namespace opdef {

template <class T>
struct DenseVector {
  std::vector<T> entries;

  DenseVector() = default;
  explicit DenseVector(std::vector<T> e) : entries(std::move(e)) {}

  static DenseVector zeros(std::size_t n) { return DenseVector(std::vector<T>(n, T(0))); }

  // Canonical basis vector e_k (support k+1).
  static DenseVector basis(std::size_t k) {
    DenseVector v = zeros(k + 1);
    v.entries[k] = T(1);
    return v;
  }

  std::size_t size() const { return entries.size(); }

  // Zero-padded read.
  T at(std::size_t i) const { return i < entries.size() ? entries[i] : T(0); }

  // Write with growth; trailing implicit zeros materialize as needed.
  void set(std::size_t i, const T& v) {
    if (i >= entries.size()) entries.resize(i + 1, T(0));
    entries[i] = v;
  }

  bool operator==(const DenseVector& o) const { return entries == o.entries; }
};

// <x, y> = sum_i x_i * conj(y_i): linear in x, conjugate-linear in y.
template <class T>
T inner_product(const DenseVector<T>& x, const DenseVector<T>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  T acc(0);
  for (std::size_t i = 0; i < n; ++i) acc += x.entries[i] * conj_of(y.entries[i]);
  return acc;
}

template <class T>
double norm(const DenseVector<T>& x) {
  double acc = 0.0;
  for (const T& v : x.entries) acc += abs2_of(v);
  return std::sqrt(acc);
}

template <class T>
DenseVector<T> add(const DenseVector<T>& x, const DenseVector<T>& y) {
  DenseVector<T> r = DenseVector<T>::zeros(std::max(x.size(), y.size()));
  for (std::size_t i = 0; i < r.size(); ++i) r.entries[i] = x.at(i) + y.at(i);
  return r;
}

template <class T>
DenseVector<T> sub(const DenseVector<T>& x, const DenseVector<T>& y) {
  DenseVector<T> r = DenseVector<T>::zeros(std::max(x.size(), y.size()));
  for (std::size_t i = 0; i < r.size(); ++i) r.entries[i] = x.at(i) - y.at(i);
  return r;
}

template <class T>
DenseVector<T> scaled(const T& c, const DenseVector<T>& x) {
  DenseVector<T> r = x;
  for (T& v : r.entries) v = c * v;
  return r;
}

// r += c * x
template <class T>
void axpy(const T& c, const DenseVector<T>& x, DenseVector<T>& r) {
  if (x.size() > r.size()) r.entries.resize(x.size(), T(0));
  for (std::size_t i = 0; i < x.size(); ++i) r.entries[i] += c * x.entries[i];
}

template <class T>
double distance(const DenseVector<T>& x, const DenseVector<T>& y) {
  return norm(sub(x, y));
}

template <class T>
bool same_vector(const DenseVector<T>& x, const DenseVector<T>& y, double tol = 0.0) {
  const std::size_t n = std::max(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (abs_of(static_cast<T>(x.at(i) - y.at(i))) > tol) return false;
  }
  return true;
}

// First n coordinates as an explicit vector.
template <class T>
DenseVector<T> head(const DenseVector<T>& x, std::size_t n) {
  DenseVector<T> r = DenseVector<T>::zeros(n);
  for (std::size_t i = 0; i < n; ++i) r.entries[i] = x.at(i);
  return r;
}

template <class T>
DenseVector<cplx> to_complex(const DenseVector<T>& x) {
  DenseVector<cplx> r = DenseVector<cplx>::zeros(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r.entries[i] = cplx(re_of(x.entries[i]), im_of(x.entries[i]));
  return r;
}

// Random vector with entries in the scalar box of the given radius.
template <class T>
DenseVector<T> random_vector(std::mt19937_64& g, std::size_t support, double radius = 1.0) {
  DenseVector<T> r = DenseVector<T>::zeros(support);
  for (std::size_t i = 0; i < support; ++i) r.entries[i] = random_scalar<T>(g, radius);
  return r;
}

// Random vector scaled to unit norm (support >= 1; retries on the measure-zero
// chance of an all-zero draw).
template <class T>
DenseVector<T> random_unit_vector(std::mt19937_64& g, std::size_t support) {
  for (;;) {
    DenseVector<T> v = random_vector<T>(g, support, 1.0);
    double n = norm(v);
    if (n > 1e-12) {
      for (T& e : v.entries) e = e * T(1.0 / n);
      return v;
    }
  }
}

}  // namespace opdef
