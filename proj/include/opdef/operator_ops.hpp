#pragma once

// Numeric semantics for OperatorSpec trees: application to finitely
// supported vectors, support propagation, rectangular matrix sections,
// operator-norm and truncation-tail bounds, adjoint rewriting,
// real->complex promotion, scalar-part splitting, and extraction of the
// finitely many vector parameters a tree mentions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "core.hpp"
#include "matrix.hpp"
#include "operator_spec.hpp"
#include "orthonormalize.hpp"
#include "svd.hpp"
#include "vector.hpp"

namespace opdef {

// ===== support propagation =====
//
// input_support_needed(T, m): some k such that outputs 0..m-1 of T(x) depend
// only on coordinates 0..k-1 of x.  unbounded_support when no finite k works.
//
// output_support_bound(T, n): some m such that supp(x) within 0..n-1 implies
// supp(T x) within 0..m-1.

template <class T>
std::size_t input_support_needed(const OperatorSpec<T>& op, std::size_t out);

template <class T>
std::size_t output_support_bound(const OperatorSpec<T>& op, std::size_t in);

template <class T>
std::size_t input_support_needed(const OperatorSpec<T>& op, std::size_t out) {
  if (out == 0) return 0;
  switch (op.kind()) {
    case OpKind::identity:
    case OpKind::diagonal:
    case OpKind::projection:
      return out;
    case OpKind::zero:
      return 0;
    case OpKind::shift_left:
      return add_support(out, 1);
    case OpKind::shift_right:
      return out - 1;
    case OpKind::coordinate_subsequence:
      return add_support(op.subsequence_data().index(out - 1), 1);
    case OpKind::finite_rank: {
      std::size_t k = 0;
      for (const auto& pr : op.finite_rank_data().pairs) k = std::max(k, pr.z.size());
      return k;
    }
    case OpKind::scale:
      return input_support_needed(*op.child_a(), out);
    case OpKind::sum:
      return std::max(input_support_needed(*op.child_a(), out),
                      input_support_needed(*op.child_b(), out));
    case OpKind::compose: {
      const std::size_t mid = input_support_needed(*op.child_a(), out);
      if (mid == unbounded_support) return unbounded_support;
      return input_support_needed(*op.child_b(), mid);
    }
    case OpKind::adjoint:
      // (T* x)_j = <x, T e_j> can read every coordinate of x.
      return unbounded_support;
    case OpKind::direct_sum: {
      const std::size_t out_l = (out + 1) / 2, out_r = out / 2;
      const std::size_t kl = input_support_needed(*op.child_a(), out_l);
      const std::size_t kr = input_support_needed(*op.child_b(), out_r);
      if (kl == unbounded_support || kr == unbounded_support) return unbounded_support;
      const std::size_t from_l = kl == 0 ? 0 : 2 * kl - 1;  // even slots
      const std::size_t from_r = 2 * kr;                    // odd slots
      return std::max(from_l, from_r);
    }
  }
  return unbounded_support;
}

template <class T>
std::size_t output_support_bound(const OperatorSpec<T>& op, std::size_t in) {
  if (in == 0) return 0;
  switch (op.kind()) {
    case OpKind::identity:
    case OpKind::diagonal:
    case OpKind::projection:
      return in;
    case OpKind::zero:
      return 0;
    case OpKind::shift_left:
      return in - 1;
    case OpKind::shift_right:
      return add_support(in, 1);
    case OpKind::coordinate_subsequence:
      return in == unbounded_support ? unbounded_support
                                     : op.subsequence_data().outputs_below(in);
    case OpKind::finite_rank: {
      std::size_t m = 0;
      for (const auto& pr : op.finite_rank_data().pairs) m = std::max(m, pr.e.size());
      return m;
    }
    case OpKind::scale:
      return op.factor() == T(0) ? 0 : output_support_bound(*op.child_a(), in);
    case OpKind::sum:
      return std::max(output_support_bound(*op.child_a(), in),
                      output_support_bound(*op.child_b(), in));
    case OpKind::compose: {
      const std::size_t mid = output_support_bound(*op.child_b(), in);
      if (mid == unbounded_support) return unbounded_support;
      return output_support_bound(*op.child_a(), mid);
    }
    case OpKind::adjoint:
      // supp(T* x) is controlled by which e_j have T e_j meeting supp(x).
      return input_support_needed(*op.child_a(), in);
    case OpKind::direct_sum: {
      const std::size_t in_l = (in + 1) / 2, in_r = in / 2;
      const std::size_t ml = output_support_bound(*op.child_a(), in_l);
      const std::size_t mr = output_support_bound(*op.child_b(), in_r);
      if (ml == unbounded_support || mr == unbounded_support) return unbounded_support;
      const std::size_t to_l = ml == 0 ? 0 : 2 * ml - 1;
      const std::size_t to_r = mr == 0 ? 0 : 2 * mr;
      return std::max(to_l, to_r);
    }
  }
  return unbounded_support;
}

// ===== application =====
//
// apply(T, x, out_limit) returns T x restricted to coordinates < out_limit.
// x stands for the l^2 vector whose coordinates beyond x.size() vanish.

template <class T>
DenseVector<T> apply(const OperatorSpec<T>& op, const DenseVector<T>& x, std::size_t out_limit);

namespace detail {

// Generic adjoint application via (T* x)_j = <x, T e_j>.
template <class T>
DenseVector<T> apply_adjoint_generic(const OperatorSpec<T>& inner, const DenseVector<T>& x,
                                     std::size_t out_limit) {
  std::size_t cols = input_support_needed(inner, x.size());
  if (cols == unbounded_support || cols > out_limit) cols = out_limit;
  DenseVector<T> r = DenseVector<T>::zeros(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    const DenseVector<T> col = apply(inner, DenseVector<T>::basis(j), x.size());
    r.entries[j] = inner_product(x, col);
  }
  return r;
}

}  // namespace detail

template <class T>
DenseVector<T> apply(const OperatorSpec<T>& op, const DenseVector<T>& x, std::size_t out_limit) {
  switch (op.kind()) {
    case OpKind::identity:
      return head(x, std::min(out_limit, x.size()));
    case OpKind::zero:
      return DenseVector<T>::zeros(0);
    case OpKind::diagonal: {
      const auto& d = op.diagonal_data();
      const std::size_t n = std::min(out_limit, x.size());
      DenseVector<T> r = DenseVector<T>::zeros(n);
      for (std::size_t k = 0; k < n; ++k) r.entries[k] = d.entry(k) * x.entries[k];
      return r;
    }
    case OpKind::shift_left: {
      const std::size_t n = std::min(out_limit, x.size() > 0 ? x.size() - 1 : 0);
      DenseVector<T> r = DenseVector<T>::zeros(n);
      for (std::size_t k = 0; k < n; ++k) r.entries[k] = x.entries[k + 1];
      return r;
    }
    case OpKind::shift_right: {
      const std::size_t n = std::min(out_limit, x.size() > 0 ? x.size() + 1 : 0);
      DenseVector<T> r = DenseVector<T>::zeros(n);
      for (std::size_t k = 1; k < n; ++k) r.entries[k] = x.entries[k - 1];
      return r;
    }
    case OpKind::coordinate_subsequence: {
      const auto& s = op.subsequence_data();
      const std::size_t n = std::min(out_limit, s.outputs_below(x.size()));
      DenseVector<T> r = DenseVector<T>::zeros(n);
      for (std::size_t k = 0; k < n; ++k) r.entries[k] = x.at(s.index(k));
      return r;
    }
    case OpKind::finite_rank: {
      DenseVector<T> r = DenseVector<T>::zeros(0);
      for (const auto& pr : op.finite_rank_data().pairs) {
        axpy(inner_product(x, pr.z), pr.e, r);
      }
      return head(r, std::min(out_limit, r.size()));
    }
    case OpKind::projection: {
      const auto& d = op.projection_data();
      const std::size_t n = std::min(out_limit, x.size());
      DenseVector<T> r = DenseVector<T>::zeros(n);
      for (std::size_t k = 0; k < n; ++k) r.entries[k] = d.member(k) ? x.entries[k] : T(0);
      return r;
    }
    case OpKind::scale:
      return scaled(op.factor(), apply(*op.child_a(), x, out_limit));
    case OpKind::sum:
      return add(apply(*op.child_a(), x, out_limit), apply(*op.child_b(), x, out_limit));
    case OpKind::compose: {
      std::size_t mid = input_support_needed(*op.child_a(), out_limit);
      const std::size_t avail = output_support_bound(*op.child_b(), x.size());
      if (avail < mid) mid = avail;
      if (mid == unbounded_support) mid = add_support(x.size(), out_limit);  // defensive cap
      const DenseVector<T> y = apply(*op.child_b(), x, mid);
      return apply(*op.child_a(), y, out_limit);
    }
    case OpKind::adjoint: {
      const OperatorSpec<T>& inner = *op.child_a();
      if (inner.kind() == OpKind::coordinate_subsequence) {
        // (S* x) scatters x_n to coordinate index(n).
        const auto& s = inner.subsequence_data();
        std::size_t m = 0;
        for (std::size_t n = 0; n < x.size(); ++n) {
          const std::size_t j = s.index(n);
          if (j < out_limit) m = std::max(m, j + 1);
        }
        DenseVector<T> r = DenseVector<T>::zeros(m);
        for (std::size_t n = 0; n < x.size(); ++n) {
          const std::size_t j = s.index(n);
          if (j < m) r.entries[j] = x.entries[n];
        }
        return r;
      }
      return detail::apply_adjoint_generic(inner, x, out_limit);
    }
    case OpKind::direct_sum: {
      DenseVector<T> xl = DenseVector<T>::zeros((x.size() + 1) / 2);
      DenseVector<T> xr = DenseVector<T>::zeros(x.size() / 2);
      for (std::size_t k = 0; k < x.size(); ++k) {
        if (k % 2 == 0) xl.entries[k / 2] = x.entries[k];
        else xr.entries[k / 2] = x.entries[k];
      }
      const std::size_t out_l = (out_limit + 1) / 2, out_r = out_limit / 2;
      const DenseVector<T> yl = apply(*op.child_a(), xl, out_l);
      const DenseVector<T> yr = apply(*op.child_b(), xr, out_r);
      std::size_t n = 0;
      if (yl.size() > 0) n = std::max(n, 2 * yl.size() - 1);
      if (yr.size() > 0) n = std::max(n, 2 * yr.size());
      DenseVector<T> r = DenseVector<T>::zeros(std::min(n, out_limit));
      for (std::size_t k = 0; k < yl.size() && 2 * k < r.size(); ++k) r.entries[2 * k] = yl.entries[k];
      for (std::size_t k = 0; k < yr.size() && 2 * k + 1 < r.size(); ++k) r.entries[2 * k + 1] = yr.entries[k];
      return r;
    }
  }
  return DenseVector<T>::zeros(0);
}

// ===== matrix sections =====

// Rectangular section: columns are T e_j (j < cols) cut to the first `rows`
// coordinates.
template <class T>
DenseMatrix<T> section(const OperatorSpec<T>& op, std::size_t rows, std::size_t cols) {
  DenseMatrix<T> a(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    const DenseVector<T> col = apply(op, DenseVector<T>::basis(j), rows);
    for (std::size_t i = 0; i < col.size() && i < rows; ++i) a.at(i, j) = col.entries[i];
  }
  return a;
}

// Square truncation P_N T P_N.
template <class T>
DenseMatrix<T> truncate(const OperatorSpec<T>& op, std::size_t n) {
  return section(op, n, n);
}

// Row count that makes the columns of section() the *entire* vectors T e_j,
// capped to keep degenerate trees bounded.  rows >= cols always.
template <class T>
std::size_t natural_rows(const OperatorSpec<T>& op, std::size_t cols) {
  const std::size_t cap = 4 * cols + 64;
  std::size_t m = output_support_bound(op, cols);
  if (m == unbounded_support || m > cap) m = cap;
  return std::max(m, cols);
}

// ===== norm bound =====

// An upper bound for the operator norm, exact for the leaves.
template <class T>
double norm_bound(const OperatorSpec<T>& op) {
  switch (op.kind()) {
    case OpKind::identity:
    case OpKind::shift_left:
    case OpKind::shift_right:
    case OpKind::coordinate_subsequence:
      return 1.0;
    case OpKind::zero:
      return 0.0;
    case OpKind::diagonal: {
      const auto& d = op.diagonal_data();
      double m = 0.0;
      for (const auto& v : d.prefix) m = std::max(m, abs_of(v));
      switch (d.tail) {
        case DiagonalTailRule::zero: break;
        case DiagonalTailRule::constant: m = std::max(m, abs_of(d.tail_constant)); break;
        case DiagonalTailRule::reciprocal:
          m = std::max(m, 1.0 / static_cast<double>(d.prefix.size() + 1));
          break;
      }
      return m;
    }
    case OpKind::finite_rank: {
      const auto& pairs = op.finite_rank_data().pairs;
      if (pairs.empty()) return 0.0;
      // ||sum <.,z_i> e_i|| = sigma_max(Z) with Z the matrix of columns z_i,
      // because the e_i are orthonormal.
      std::size_t rows = 0;
      for (const auto& pr : pairs) rows = std::max(rows, pr.z.size());
      rows = std::max<std::size_t>(rows, 1);
      DenseMatrix<T> z(rows, pairs.size());
      for (std::size_t j = 0; j < pairs.size(); ++j)
        for (std::size_t i = 0; i < pairs[j].z.size(); ++i) z.at(i, j) = pairs[j].z.entries[i];
      const auto sv = singular_values(z);
      return sv.empty() ? 0.0 : sv.front();
    }
    case OpKind::projection:
      return op.projection_data().empty_target() ? 0.0 : 1.0;
    case OpKind::scale:
      return abs_of(op.factor()) * norm_bound(*op.child_a());
    case OpKind::sum:
      return norm_bound(*op.child_a()) + norm_bound(*op.child_b());
    case OpKind::compose:
      return norm_bound(*op.child_a()) * norm_bound(*op.child_b());
    case OpKind::adjoint:
      return norm_bound(*op.child_a());
    case OpKind::direct_sum:
      return std::max(norm_bound(*op.child_a()), norm_bound(*op.child_b()));
  }
  return 0.0;
}

// ===== truncation tail bounds =====
//
// tail_sides(T, N).right bounds ||T (I - P_N)|| and .left bounds
// ||(I - P_N) T||; tail_norm_bound_value(T, N) bounds ||T - P_N T P_N||.
// All are finite, conservative, and computable by structural recursion.

struct TailSides {
  double left = 0.0, right = 0.0;
};

template <class T>
TailSides tail_sides(const OperatorSpec<T>& op, std::size_t n);

namespace detail {

template <class T>
double diagonal_tail_sup(const DiagonalData<T>& d, std::size_t n) {
  double m = 0.0;
  for (std::size_t k = n; k < d.prefix.size(); ++k) m = std::max(m, abs_of(d.prefix[k]));
  switch (d.tail) {
    case DiagonalTailRule::zero: break;
    case DiagonalTailRule::constant: m = std::max(m, abs_of(d.tail_constant)); break;
    case DiagonalTailRule::reciprocal:
      m = std::max(m, 1.0 / static_cast<double>(std::max(n, d.prefix.size()) + 1));
      break;
  }
  return m;
}

// sigma_max of the finite-rank map with each listed vector cut to
// coordinates >= n (vectors enter as columns).
template <class T, class Pick>
double finite_rank_tail_sigma(const FiniteRankData<T>& fr, std::size_t n, Pick pick) {
  if (fr.pairs.empty()) return 0.0;
  std::size_t rows = 0;
  for (const auto& pr : fr.pairs) rows = std::max(rows, pick(pr).size());
  if (rows <= n) return 0.0;
  DenseMatrix<T> z(rows - n, fr.pairs.size());
  for (std::size_t j = 0; j < fr.pairs.size(); ++j) {
    const auto& v = pick(fr.pairs[j]);
    for (std::size_t i = n; i < v.size(); ++i) z.at(i - n, j) = v.entries[i];
  }
  const auto sv = singular_values(z);
  return sv.empty() ? 0.0 : sv.front();
}

// Largest m in [0, cap] with f(m) <= n, assuming f nondecreasing; 0 if none.
template <class F>
std::size_t largest_below(F f, std::size_t n, std::size_t cap) {
  if (f(0) > n) return 0;
  std::size_t lo = 0, hi = cap;
  if (f(hi) <= n) return hi;
  while (lo + 1 < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (f(mid) <= n) lo = mid;
    else hi = mid;
  }
  return lo;
}

}  // namespace detail

template <class T>
TailSides tail_sides(const OperatorSpec<T>& op, std::size_t n) {
  switch (op.kind()) {
    case OpKind::identity:
      return {1.0, 1.0};
    case OpKind::zero:
      return {0.0, 0.0};
    case OpKind::diagonal: {
      const double t = detail::diagonal_tail_sup(op.diagonal_data(), n);
      return {t, t};
    }
    case OpKind::shift_left:
    case OpKind::shift_right:
    case OpKind::coordinate_subsequence:
      return {1.0, 1.0};
    case OpKind::finite_rank: {
      const auto& fr = op.finite_rank_data();
      const double zmax =
          detail::finite_rank_tail_sigma(fr, 0, [](const RankOnePair<T>& p) -> const DenseVector<T>& { return p.z; });
      const double z_tail =
          detail::finite_rank_tail_sigma(fr, n, [](const RankOnePair<T>& p) -> const DenseVector<T>& { return p.z; });
      const double e_tail =
          detail::finite_rank_tail_sigma(fr, n, [](const RankOnePair<T>& p) -> const DenseVector<T>& { return p.e; });
      // right: T(I-P) keeps e_i, cuts z_i.  left: (I-P)T cuts e_i; bound by
      // sigma_max(cut E) * sigma_max(Z) using orthonormality of the e_i.
      return {e_tail * zmax, z_tail};
    }
    case OpKind::projection: {
      const double t = op.projection_data().member_at_or_beyond(n) ? 1.0 : 0.0;
      return {t, t};
    }
    case OpKind::scale: {
      TailSides s = tail_sides(*op.child_a(), n);
      const double c = abs_of(op.factor());
      return {c * s.left, c * s.right};
    }
    case OpKind::sum: {
      const TailSides a = tail_sides(*op.child_a(), n);
      const TailSides b = tail_sides(*op.child_b(), n);
      return {a.left + b.left, a.right + b.right};
    }
    case OpKind::compose: {
      const OperatorSpec<T>& outer = *op.child_a();
      const OperatorSpec<T>& inner = *op.child_b();
      const double no = norm_bound(outer), ni = norm_bound(inner);
      const TailSides so = tail_sides(outer, n);
      const TailSides si = tail_sides(inner, n);
      const std::size_t cap = add_support(n, 1u << 16);

      // right(AB, N): B(I-P_N) writes nothing below m while
      // input_support_needed(B, m) <= N.
      const std::size_t m_right = detail::largest_below(
          [&](std::size_t m) { return input_support_needed(inner, m); }, n, cap);
      const double right = std::min(no * si.right, tail_sides(outer, m_right).right * ni);

      // left(AB, N): A P_m lands below N while output_support_bound(A, m) <= N.
      const std::size_t m_left = detail::largest_below(
          [&](std::size_t m) { return output_support_bound(outer, m); }, n, cap);
      const double left = std::min(so.left * ni, no * tail_sides(inner, m_left).left);
      return {left, right};
    }
    case OpKind::adjoint: {
      const TailSides s = tail_sides(*op.child_a(), n);
      return {s.right, s.left};
    }
    case OpKind::direct_sum: {
      const TailSides a = tail_sides(*op.child_a(), (n + 1) / 2);
      const TailSides b = tail_sides(*op.child_b(), n / 2);
      return {std::max(a.left, b.left), std::max(a.right, b.right)};
    }
  }
  return {norm_bound(op), norm_bound(op)};
}

// Upper bound for ||T - P_N T P_N||.
template <class T>
double tail_norm_bound_value(const OperatorSpec<T>& op, std::size_t n) {
  switch (op.kind()) {
    case OpKind::identity:
      return 1.0;
    case OpKind::zero:
      return 0.0;
    case OpKind::diagonal:
      return detail::diagonal_tail_sup(op.diagonal_data(), n);
    case OpKind::projection:
      return op.projection_data().member_at_or_beyond(n) ? 1.0 : 0.0;
    case OpKind::scale:
      return abs_of(op.factor()) * tail_norm_bound_value(*op.child_a(), n);
    case OpKind::sum:
      return tail_norm_bound_value(*op.child_a(), n) + tail_norm_bound_value(*op.child_b(), n);
    case OpKind::adjoint:
      return tail_norm_bound_value(*op.child_a(), n);
    case OpKind::direct_sum:
      return std::max(tail_norm_bound_value(*op.child_a(), (n + 1) / 2),
                      tail_norm_bound_value(*op.child_b(), n / 2));
    default: {
      // T - P T P = T(I-P) + (I-P)T P, so left + right always works.
      const TailSides s = tail_sides(op, n);
      return s.left + s.right;
    }
  }
}

// tail_norm_bound(T, N): the bound above when the tree admits a decaying
// bound at all, std::nullopt otherwise (e.g. shifts, identity).  Probed at a
// huge cutoff: structurally compact trees decay to ~0 there, everything else
// stays O(1).
template <class T>
std::optional<double> tail_norm_bound(const OperatorSpec<T>& op, std::size_t n) {
  const std::size_t probe = std::size_t(1) << 30;
  const double at_infinity = tail_norm_bound_value(op, probe);
  if (at_infinity > 1e-13 * std::max(1.0, norm_bound(op))) return std::nullopt;
  return tail_norm_bound_value(op, n);
}

// ===== structural support =====
//
// Coordinates below this bound carry all the "irregular" data of the tree
// (prefixes, finite-rank vectors, finite sets); beyond it every leaf acts by
// its translation-regular rule.  Probes for asymptotic behaviour are placed
// past this index.
template <class T>
std::size_t structural_support(const OperatorSpec<T>& op) {
  switch (op.kind()) {
    case OpKind::identity:
    case OpKind::zero:
    case OpKind::shift_left:
    case OpKind::shift_right:
      return 0;
    case OpKind::diagonal:
      return op.diagonal_data().prefix.size();
    case OpKind::coordinate_subsequence: {
      const auto& s = op.subsequence_data();
      std::size_t m = s.start;
      if (!s.prefix.empty()) m = std::max(m, s.prefix.back() + 1);
      return m;
    }
    case OpKind::finite_rank: {
      std::size_t m = 0;
      for (const auto& pr : op.finite_rank_data().pairs)
        m = std::max({m, pr.z.size(), pr.e.size()});
      return m;
    }
    case OpKind::projection: {
      const auto& d = op.projection_data();
      if (d.target == ProjectionTargetKind::finite_set)
        return d.indices.empty() ? 0 : d.indices.back() + 1;
      return d.start;
    }
    case OpKind::scale:
    case OpKind::adjoint:
      return structural_support(*op.child_a());
    case OpKind::sum:
    case OpKind::compose:
      return std::max(structural_support(*op.child_a()), structural_support(*op.child_b()));
    case OpKind::direct_sum:
      return 2 * std::max(structural_support(*op.child_a()), structural_support(*op.child_b())) + 2;
  }
  return 0;
}

// ===== adjoint rewriting =====
//
// Rewrites the tree of T* without an adjoint wrapper wherever the grammar
// allows it; only coordinate subsequences keep an explicit adjoint node.

template <class T>
SpecPtr<T> adjoint_spec(const SpecPtr<T>& op) {
  using Spec = OperatorSpec<T>;
  switch (op->kind()) {
    case OpKind::identity:
    case OpKind::zero:
      return op;
    case OpKind::diagonal: {
      DiagonalData<T> d = op->diagonal_data();
      for (auto& v : d.prefix) v = conj_of(v);
      d.tail_constant = conj_of(d.tail_constant);
      return Spec::diagonal(std::move(d));
    }
    case OpKind::shift_left:
      return Spec::shift_right();
    case OpKind::shift_right:
      return Spec::shift_left();
    case OpKind::coordinate_subsequence:
      return Spec::adjoint(op);
    case OpKind::finite_rank: {
      // (sum <.,z_i> e_i)* = sum <.,e_i> z_i; re-expressed over an
      // orthonormal basis {f_j} of span{z_i} so that the result is again a
      // well-formed finite-rank node: pairs (w_j, f_j) with
      // w_j = sum_i <f_j, z_i> e_i.
      const auto& fr = op->finite_rank_data();
      std::vector<DenseVector<T>> zs;
      zs.reserve(fr.pairs.size());
      for (const auto& pr : fr.pairs) zs.push_back(pr.z);
      const std::vector<DenseVector<T>> basis = orthonormalize(zs);
      FiniteRankData<T> out;
      for (const auto& f : basis) {
        DenseVector<T> w = DenseVector<T>::zeros(0);
        for (const auto& pr : fr.pairs) axpy(inner_product(f, pr.z), pr.e, w);
        out.pairs.push_back({std::move(w), f});
      }
      return Spec::finite_rank(std::move(out));
    }
    case OpKind::projection:
      return op;
    case OpKind::scale:
      return Spec::scale(conj_of(op->factor()), adjoint_spec<T>(op->child_a()));
    case OpKind::sum:
      return Spec::sum(adjoint_spec<T>(op->child_a()), adjoint_spec<T>(op->child_b()));
    case OpKind::compose:
      return Spec::compose(adjoint_spec<T>(op->child_b()), adjoint_spec<T>(op->child_a()));
    case OpKind::adjoint:
      return op->child_a();
    case OpKind::direct_sum:
      return Spec::direct_sum(adjoint_spec<T>(op->child_a()), adjoint_spec<T>(op->child_b()));
  }
  return op;
}

// ===== real -> complex promotion =====

inline SpecPtr<cplx> complexify(const SpecPtr<double>& op) {
  using Spec = OperatorSpec<cplx>;
  switch (op->kind()) {
    case OpKind::identity: return Spec::identity();
    case OpKind::zero: return Spec::zero();
    case OpKind::shift_left: return Spec::shift_left();
    case OpKind::shift_right: return Spec::shift_right();
    case OpKind::diagonal: {
      const auto& d = op->diagonal_data();
      DiagonalData<cplx> out;
      out.prefix.assign(d.prefix.begin(), d.prefix.end());
      out.tail = d.tail;
      out.tail_constant = d.tail_constant;
      return Spec::diagonal(std::move(out));
    }
    case OpKind::coordinate_subsequence:
      return Spec::subsequence(op->subsequence_data());
    case OpKind::finite_rank: {
      FiniteRankData<cplx> out;
      for (const auto& pr : op->finite_rank_data().pairs)
        out.pairs.push_back({to_complex(pr.z), to_complex(pr.e)});
      return Spec::finite_rank(std::move(out));
    }
    case OpKind::projection:
      return Spec::projection(op->projection_data());
    case OpKind::scale:
      return Spec::scale(cplx(op->factor()), complexify(op->child_a()));
    case OpKind::sum:
      return Spec::sum(complexify(op->child_a()), complexify(op->child_b()));
    case OpKind::compose:
      return Spec::compose(complexify(op->child_a()), complexify(op->child_b()));
    case OpKind::adjoint:
      return Spec::adjoint(complexify(op->child_a()));
    case OpKind::direct_sum:
      return Spec::direct_sum(complexify(op->child_a()), complexify(op->child_b()));
  }
  return Spec::zero();
}

inline SpecPtr<cplx> complexify(const SpecPtr<cplx>& op) { return op; }

// ===== scalar-part splitting =====
//
// split_scalar(T) = (alpha, R) with T = alpha I + R, found structurally.
// subtract_scalar(T, lambda) builds T - lambda I, folding the subtraction
// into the split so that structurally compact remainders stay visibly so.

template <class T>
struct ScalarSplit {
  T alpha = T(0);
  SpecPtr<T> rest;
};

namespace detail {

template <class T>
bool is_zero_spec(const SpecPtr<T>& op) {
  if (op->kind() == OpKind::zero) return true;
  if (op->kind() == OpKind::finite_rank) return op->finite_rank_data().pairs.empty();
  if (op->kind() == OpKind::projection) return op->projection_data().empty_target();
  return false;
}

template <class T>
SpecPtr<T> make_sum(SpecPtr<T> a, SpecPtr<T> b) {
  if (is_zero_spec(a)) return b;
  if (is_zero_spec(b)) return a;
  return OperatorSpec<T>::sum(std::move(a), std::move(b));
}

template <class T>
SpecPtr<T> make_scale(T c, SpecPtr<T> x) {
  if (c == T(0) || is_zero_spec(x)) return OperatorSpec<T>::zero();
  if (c == T(1)) return x;
  return OperatorSpec<T>::scale(c, std::move(x));
}

}  // namespace detail

template <class T>
ScalarSplit<T> split_scalar(const SpecPtr<T>& op) {
  using Spec = OperatorSpec<T>;
  switch (op->kind()) {
    case OpKind::identity:
      return {T(1), Spec::zero()};
    case OpKind::zero:
      return {T(0), Spec::zero()};
    case OpKind::diagonal: {
      const auto& d = op->diagonal_data();
      if (d.tail == DiagonalTailRule::constant) {
        // entries = c + (prefix_k - c on the prefix, 0 beyond): compact rest.
        DiagonalData<T> rest;
        rest.prefix.reserve(d.prefix.size());
        for (const auto& v : d.prefix) rest.prefix.push_back(v - d.tail_constant);
        rest.tail = DiagonalTailRule::zero;
        const bool all_zero =
            std::all_of(rest.prefix.begin(), rest.prefix.end(), [](const T& v) { return v == T(0); });
        return {d.tail_constant, all_zero ? Spec::zero() : Spec::diagonal(std::move(rest))};
      }
      return {T(0), op};
    }
    case OpKind::projection: {
      const auto& d = op->projection_data();
      if (d.empty_target()) return {T(0), Spec::zero()};
      if (d.target == ProjectionTargetKind::complement_of_arithmetic_set && d.step == 1) {
        // I minus the finite projection onto {0..start-1}.
        ProjectionData fin;
        fin.target = ProjectionTargetKind::finite_set;
        for (std::size_t k = 0; k < d.start; ++k) fin.indices.push_back(k);
        return {T(1), detail::make_scale(T(-1), Spec::projection(std::move(fin)))};
      }
      if (d.target == ProjectionTargetKind::arithmetic_set && d.step == 1) {
        // Cofinite arithmetic set {start, start+1, ...}: same shape.
        ProjectionData fin;
        fin.target = ProjectionTargetKind::finite_set;
        for (std::size_t k = 0; k < d.start; ++k) fin.indices.push_back(k);
        return {T(1), detail::make_scale(T(-1), Spec::projection(std::move(fin)))};
      }
      return {T(0), op};
    }
    case OpKind::scale: {
      const ScalarSplit<T> s = split_scalar<T>(op->child_a());
      return {op->factor() * s.alpha, detail::make_scale(op->factor(), s.rest)};
    }
    case OpKind::sum: {
      const ScalarSplit<T> a = split_scalar<T>(op->child_a());
      const ScalarSplit<T> b = split_scalar<T>(op->child_b());
      return {a.alpha + b.alpha, detail::make_sum(a.rest, b.rest)};
    }
    case OpKind::compose: {
      // (aI + R)(bI + S) = ab I + aS + bR + RS.
      const ScalarSplit<T> a = split_scalar<T>(op->child_a());
      const ScalarSplit<T> b = split_scalar<T>(op->child_b());
      SpecPtr<T> rest = detail::make_sum(detail::make_scale(a.alpha, b.rest),
                                         detail::make_scale(b.alpha, a.rest));
      if (!detail::is_zero_spec(a.rest) && !detail::is_zero_spec(b.rest))
        rest = detail::make_sum(rest, Spec::compose(a.rest, b.rest));
      return {a.alpha * b.alpha, rest};
    }
    case OpKind::adjoint: {
      const ScalarSplit<T> s = split_scalar<T>(op->child_a());
      if (s.alpha == T(0)) return {T(0), op};
      return {conj_of(s.alpha),
              detail::is_zero_spec(s.rest) ? Spec::zero() : adjoint_spec<T>(s.rest)};
    }
    case OpKind::direct_sum: {
      const ScalarSplit<T> a = split_scalar<T>(op->child_a());
      const ScalarSplit<T> b = split_scalar<T>(op->child_b());
      if (a.alpha == b.alpha) {
        if (detail::is_zero_spec(a.rest) && detail::is_zero_spec(b.rest))
          return {a.alpha, Spec::zero()};
        return {a.alpha, Spec::direct_sum(a.rest, b.rest)};
      }
      return {T(0), op};
    }
    default:
      return {T(0), op};
  }
}

template <class T>
SpecPtr<T> subtract_scalar(const SpecPtr<T>& op, T lambda) {
  using Spec = OperatorSpec<T>;
  const ScalarSplit<T> s = split_scalar<T>(op);
  const T c = s.alpha - lambda;
  const double scale = std::max({1.0, abs_of(s.alpha), abs_of(lambda)});
  if (abs_of(c) <= 1e-13 * scale) return s.rest;
  return detail::make_sum(detail::make_scale(c, Spec::identity()), s.rest);
}

// ===== parameter extraction =====
//
// All vector data the tree mentions, embedded into the ambient space (so
// direct-sum children land on their even/odd slots), plus an orthonormal
// basis of their span and the structural support.  These are the candidate
// probe directions for certificates and refutations.

template <class T>
struct ParameterSet {
  std::vector<DenseVector<T>> vectors;
  std::vector<DenseVector<T>> basis;
  std::size_t support = 0;
};

namespace detail {

template <class T>
using Embed = DenseVector<T> (*)(const DenseVector<T>&);

template <class T>
DenseVector<T> embed_id(const DenseVector<T>& v) { return v; }

template <class T>
DenseVector<T> embed_even(const DenseVector<T>& v) {
  DenseVector<T> r = DenseVector<T>::zeros(v.size() == 0 ? 0 : 2 * v.size() - 1);
  for (std::size_t k = 0; k < v.size(); ++k) r.entries[2 * k] = v.entries[k];
  return r;
}

template <class T>
DenseVector<T> embed_odd(const DenseVector<T>& v) {
  DenseVector<T> r = DenseVector<T>::zeros(2 * v.size());
  for (std::size_t k = 0; k < v.size(); ++k) r.entries[2 * k + 1] = v.entries[k];
  return r;
}

template <class T, class EmbedFn>
void collect_parameters(const OperatorSpec<T>& op, const EmbedFn& embed,
                        std::vector<DenseVector<T>>& out) {
  constexpr std::size_t kSetCutoff = 8;
  switch (op.kind()) {
    case OpKind::diagonal: {
      const auto& d = op.diagonal_data();
      DenseVector<T> v = DenseVector<T>::zeros(d.prefix.size());
      v.entries = d.prefix;
      if (v.size() > 0) out.push_back(embed(v));
      return;
    }
    case OpKind::finite_rank:
      for (const auto& pr : op.finite_rank_data().pairs) {
        out.push_back(embed(pr.z));
        out.push_back(embed(pr.e));
      }
      return;
    case OpKind::projection: {
      const auto& d = op.projection_data();
      std::size_t found = 0;
      for (std::size_t k = 0; found < kSetCutoff; ++k) {
        if (d.member(k)) {
          out.push_back(embed(DenseVector<T>::basis(k)));
          ++found;
        }
        if (!d.member_at_or_beyond(k + 1)) break;
      }
      return;
    }
    case OpKind::coordinate_subsequence: {
      const auto& s = op.subsequence_data();
      for (std::size_t n = 0; n < std::min(s.prefix.size() + 2, kSetCutoff); ++n)
        out.push_back(embed(DenseVector<T>::basis(s.index(n))));
      return;
    }
    case OpKind::scale:
    case OpKind::adjoint:
      collect_parameters(*op.child_a(), embed, out);
      return;
    case OpKind::sum:
    case OpKind::compose:
      collect_parameters(*op.child_a(), embed, out);
      collect_parameters(*op.child_b(), embed, out);
      return;
    case OpKind::direct_sum: {
      auto even = [&embed](const DenseVector<T>& v) { return embed(embed_even(v)); };
      auto odd = [&embed](const DenseVector<T>& v) { return embed(embed_odd(v)); };
      collect_parameters(*op.child_a(), even, out);
      collect_parameters(*op.child_b(), odd, out);
      return;
    }
    default:
      return;
  }
}

}  // namespace detail

template <class T>
ParameterSet<T> extract_parameters(const OperatorSpec<T>& op) {
  ParameterSet<T> ps;
  detail::collect_parameters(op, detail::embed_id<T>, ps.vectors);
  ps.basis = orthonormalize(ps.vectors);
  ps.support = structural_support(op);
  for (const auto& v : ps.vectors) ps.support = std::max(ps.support, v.size());
  return ps;
}

// ===== linearity check =====

struct LinearityReport {
  double max_residual = 0.0;
  bool pass = false;
};

template <class T>
LinearityReport linearity_check(const OperatorSpec<T>& op, std::size_t trials = 16,
                                std::uint64_t seed = 0, std::size_t support = 24) {
  std::mt19937_64 gen(seed);
  const double scale = std::max(1.0, norm_bound(op));
  std::size_t out = output_support_bound(op, support);
  if (out == unbounded_support) out = support + 256;
  LinearityReport rep;
  for (std::size_t t = 0; t < trials; ++t) {
    const DenseVector<T> x = random_vector<T>(gen, support);
    const DenseVector<T> y = random_vector<T>(gen, support);
    const T a = random_scalar<T>(gen, 2.0), b = random_scalar<T>(gen, 2.0);
    DenseVector<T> combo = add(scaled(a, x), scaled(b, y));
    const DenseVector<T> lhs = apply(op, combo, out);
    const DenseVector<T> rhs = add(scaled(a, apply(op, x, out)), scaled(b, apply(op, y, out)));
    rep.max_residual = std::max(rep.max_residual, distance(lhs, rhs));
  }
  rep.pass = rep.max_residual <= 1e-10 * scale;
  return rep;
}

}  // namespace opdef
