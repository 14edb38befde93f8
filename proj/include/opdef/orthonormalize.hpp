#pragma once

// Modified Gram-Schmidt with a drop tolerance and one re-orthogonalization
// pass.  Input order is preserved; vectors whose residual after projection
// falls below the tolerance are dropped (dependent within tolerance).

#include <vector>

#include "core.hpp"
#include "vector.hpp"

namespace opdef {

template <class T>
std::vector<DenseVector<T>> orthonormalize(const std::vector<DenseVector<T>>& input,
                                           double drop_tol = 1e-10) {
  std::vector<DenseVector<T>> basis;
  basis.reserve(input.size());
  for (const DenseVector<T>& v : input) {
    DenseVector<T> w = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const DenseVector<T>& b : basis) {
        const T ip = inner_product(w, b);
        axpy(static_cast<T>(-ip), b, w);
      }
    }
    const double r = norm(w);
    if (r <= drop_tol) continue;
    for (T& e : w.entries) e = e * T(1.0 / r);
    basis.push_back(std::move(w));
  }
  return basis;
}

// Projection of x onto the span of an orthonormal basis.
template <class T>
DenseVector<T> project_onto(const std::vector<DenseVector<T>>& basis, const DenseVector<T>& x) {
  DenseVector<T> p = DenseVector<T>::zeros(x.size());
  for (const DenseVector<T>& b : basis) {
    const T ip = inner_product(x, b);
    axpy(ip, b, p);
  }
  return p;
}

}  // namespace opdef
