#pragma once

// Shared fixtures for the test suites: a catalog of representative operator
// trees exercising every node kind, plus small builders used in several
// files.

#include <string>
#include <utility>
#include <vector>

#include "opdef/core.hpp"
#include "opdef/operator_ops.hpp"
#include "opdef/operator_spec.hpp"
#include "opdef/vector.hpp"

namespace opdef::testing {

template <class T>
using Spec = OperatorSpec<T>;

template <class T>
SpecPtr<T> diag_reciprocal(std::vector<T> prefix = {}) {
  DiagonalData<T> d;
  d.prefix = std::move(prefix);
  d.tail = DiagonalTailRule::reciprocal;
  return Spec<T>::diagonal(std::move(d));
}

template <class T>
SpecPtr<T> diag_constant(T c, std::vector<T> prefix = {}) {
  DiagonalData<T> d;
  d.prefix = std::move(prefix);
  d.tail = DiagonalTailRule::constant;
  d.tail_constant = c;
  return Spec<T>::diagonal(std::move(d));
}

template <class T>
SpecPtr<T> diag_finite(std::vector<T> prefix) {
  DiagonalData<T> d;
  d.prefix = std::move(prefix);
  d.tail = DiagonalTailRule::zero;
  return Spec<T>::diagonal(std::move(d));
}

template <class T>
SpecPtr<T> evens_subsequence() {
  SubsequenceData s;
  s.start = 0;
  s.step = 2;
  return Spec<T>::subsequence(s);
}

template <class T>
SpecPtr<T> even_projection() {
  ProjectionData p;
  p.target = ProjectionTargetKind::arithmetic_set;
  p.start = 0;
  p.step = 2;
  return Spec<T>::projection(p);
}

template <class T>
SpecPtr<T> finite_projection(std::vector<std::size_t> idx) {
  ProjectionData p;
  p.target = ProjectionTargetKind::finite_set;
  p.indices = std::move(idx);
  return Spec<T>::projection(p);
}

template <class T>
SpecPtr<T> cofinite_projection(std::size_t start) {
  ProjectionData p;
  p.target = ProjectionTargetKind::complement_of_arithmetic_set;
  p.start = start;
  p.step = 1;
  return Spec<T>::projection(p);
}

// A rank-2 map with orthonormal e vectors and dense-ish z vectors.
template <class T>
SpecPtr<T> sample_finite_rank() {
  FiniteRankData<T> f;
  DenseVector<T> z0 = DenseVector<T>::zeros(4);
  z0.entries = {T(1), T(0), T(-2), T(0.5)};
  DenseVector<T> z1 = DenseVector<T>::zeros(3);
  z1.entries = {T(0), T(3), T(1)};
  f.pairs.push_back({z0, DenseVector<T>::basis(1)});
  f.pairs.push_back({z1, DenseVector<T>::basis(3)});
  return Spec<T>::finite_rank(std::move(f));
}

struct NamedCase {
  std::string name;
};

template <class T>
std::vector<std::pair<std::string, SpecPtr<T>>> operator_catalog() {
  using S = Spec<T>;
  std::vector<std::pair<std::string, SpecPtr<T>>> out;
  out.emplace_back("identity", S::identity());
  out.emplace_back("zero", S::zero());
  out.emplace_back("diag_reciprocal", diag_reciprocal<T>({T(3), T(1)}));
  out.emplace_back("diag_constant", diag_constant<T>(T(2), {T(5), T(3)}));
  out.emplace_back("shift_left", S::shift_left());
  out.emplace_back("shift_right", S::shift_right());
  out.emplace_back("evens", evens_subsequence<T>());
  {
    SubsequenceData s;
    s.prefix = {1, 4};
    s.start = 7;
    s.step = 3;
    out.emplace_back("subseq_prefixed", S::subsequence(s));
  }
  out.emplace_back("finite_rank", sample_finite_rank<T>());
  out.emplace_back("proj_finite", finite_projection<T>({0, 3}));
  out.emplace_back("proj_even", even_projection<T>());
  out.emplace_back("proj_cofinite", cofinite_projection<T>(3));
  out.emplace_back("scale_shift", S::scale(T(2), S::shift_left()));
  out.emplace_back("sum_id_diag", S::sum(S::identity(), diag_reciprocal<T>()));
  out.emplace_back("compose_LR", S::compose(S::shift_left(), S::shift_right()));
  out.emplace_back("compose_diag_shift", S::compose(diag_reciprocal<T>(), S::shift_right()));
  out.emplace_back("adjoint_evens", S::adjoint(evens_subsequence<T>()));
  out.emplace_back("adjoint_shift", S::adjoint(S::shift_left()));
  out.emplace_back("direct_sum_LR", S::direct_sum(S::shift_left(), S::shift_right()));
  out.emplace_back("nested",
                   S::sum(S::scale(T(0.5), S::direct_sum(diag_reciprocal<T>(), S::identity())),
                          S::compose(S::adjoint(evens_subsequence<T>()), sample_finite_rank<T>())));
  return out;
}

}  // namespace opdef::testing
