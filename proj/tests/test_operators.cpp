// Tests for the operator expression trees: application semantics on every
// node kind (hand-worked cases first), support propagation, matrix sections,
// norm and truncation-tail bounds, adjoint rewriting, complex promotion,
// scalar-part splitting, parameter extraction, and JSON round-trips.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "opdef/operator_json.hpp"
#include "opdef/operator_ops.hpp"
#include "opdef/operator_spec.hpp"
#include "test_helpers.hpp"

using namespace opdef;
using namespace opdef::testing;
using Catch::Approx;

namespace {

constexpr std::size_t kBig = 1u << 20;

template <class T>
DenseVector<T> vec(std::initializer_list<T> xs) {
  DenseVector<T> v = DenseVector<T>::zeros(xs.size());
  std::size_t i = 0;
  for (const auto& x : xs) v.entries[i++] = x;
  return v;
}

// Measured operator norm of a section, as a lower-bound probe.
template <class T>
double section_norm(const OperatorSpec<T>& op, std::size_t n) {
  const auto sv = singular_values(section(op, natural_rows(op, n), n));
  return sv.empty() ? 0.0 : sv.front();
}

}  // namespace

TEST_CASE("apply: identity, zero, diagonal") {
  auto x = vec<double>({1, 2, 3, 4});
  CHECK(same_vector(apply(*Spec<double>::identity(), x, kBig), x));
  CHECK(apply(*Spec<double>::zero(), x, kBig).size() == 0);

  // prefix (3, 1), then 1/(k+1): entries 3, 1, 1/3, 1/4.
  auto d = diag_reciprocal<double>({3, 1});
  auto y = apply(*d, vec<double>({1, 1, 1, 1}), kBig);
  REQUIRE(y.size() == 4);
  CHECK(y.entries[0] == Approx(3.0));
  CHECK(y.entries[1] == Approx(1.0));
  CHECK(y.entries[2] == Approx(1.0 / 3.0));
  CHECK(y.entries[3] == Approx(0.25));

  // constant tail: 5, 3, then 2 forever.
  auto dc = diag_constant<double>(2, {5, 3});
  auto yc = apply(*dc, vec<double>({1, 1, 1, 1}), kBig);
  CHECK(yc.entries[2] == Approx(2.0));
  CHECK(yc.entries[3] == Approx(2.0));
}

TEST_CASE("apply: shifts") {
  auto x = vec<double>({1, 2, 3});
  CHECK(same_vector(apply(*Spec<double>::shift_left(), x, kBig), vec<double>({2, 3})));
  CHECK(same_vector(apply(*Spec<double>::shift_right(), x, kBig), vec<double>({0, 1, 2, 3})));
  // L R = I, R L kills coordinate 0.
  auto lr = Spec<double>::compose(Spec<double>::shift_left(), Spec<double>::shift_right());
  auto rl = Spec<double>::compose(Spec<double>::shift_right(), Spec<double>::shift_left());
  CHECK(same_vector(apply(*lr, x, kBig), x));
  CHECK(same_vector(apply(*rl, x, kBig), vec<double>({0, 2, 3})));
}

TEST_CASE("apply: coordinate subsequence gathers, adjoint scatters") {
  auto evens = evens_subsequence<double>();
  auto x = vec<double>({10, 11, 12, 13, 14, 15});
  CHECK(same_vector(apply(*evens, x, kBig), vec<double>({10, 12, 14})));

  SubsequenceData s;
  s.prefix = {1, 4};
  s.start = 7;
  s.step = 3;
  auto sub = Spec<double>::subsequence(s);
  // indices: 1, 4, 7, 10, ...
  auto big = DenseVector<double>::zeros(11);
  for (std::size_t k = 0; k < 11; ++k) big.entries[k] = double(k);
  CHECK(same_vector(apply(*sub, big, kBig), vec<double>({1, 4, 7, 10})));

  // S* scatters x_n to coordinate index(n).
  auto scatter = apply(*Spec<double>::adjoint(evens), vec<double>({1, 2}), kBig);
  CHECK(same_vector(scatter, vec<double>({1, 0, 2})));

  // S S* = I on the evens side.
  auto ss = Spec<double>::compose(evens, Spec<double>::adjoint(evens));
  auto xr = vec<double>({5, -1, 2});
  CHECK(same_vector(apply(*ss, xr, kBig), xr));
}

TEST_CASE("apply: finite rank, hand-worked") {
  // x -> <x, z> e_0 with z = (0, 2): real inner product is x_1 * 2.
  FiniteRankData<double> f;
  f.pairs.push_back({vec<double>({0, 2}), DenseVector<double>::basis(0)});
  auto t = Spec<double>::finite_rank(f);
  CHECK(same_vector(apply(*t, vec<double>({5, 7}), kBig), vec<double>({14})));

  // Complex: z = (i), e = e_0: T x = <x, z> e_0 = conj(i) x_0 e_0 = -i x_0.
  FiniteRankData<cplx> fc;
  fc.pairs.push_back({vec<cplx>({cplx(0, 1)}), DenseVector<cplx>::basis(0)});
  auto tc = Spec<cplx>::finite_rank(fc);
  auto yc = apply(*tc, vec<cplx>({cplx(2, 0)}), kBig);
  REQUIRE(yc.size() == 1);
  CHECK(abs_of(yc.entries[0] - cplx(0, -2)) < 1e-15);

  CHECK_THROWS_AS(
      [] {
        FiniteRankData<double> bad;
        bad.pairs.push_back({vec<double>({1}), vec<double>({1, 1})});  // not unit
        return Spec<double>::finite_rank(bad);
      }(),
      std::invalid_argument);
}

TEST_CASE("apply: projections") {
  auto x = vec<double>({1, 2, 3, 4, 5});
  CHECK(same_vector(apply(*finite_projection<double>({0, 3}), x, kBig), vec<double>({1, 0, 0, 4, 0})));
  CHECK(same_vector(apply(*even_projection<double>(), x, kBig), vec<double>({1, 0, 3, 0, 5})));
  ProjectionData odd;
  odd.target = ProjectionTargetKind::complement_of_arithmetic_set;
  odd.start = 0;
  odd.step = 2;
  CHECK(same_vector(apply(*Spec<double>::projection(odd), x, kBig), vec<double>({0, 2, 0, 4, 0})));
}

TEST_CASE("apply: direct sum interleaves parity-wise") {
  auto ds = Spec<double>::direct_sum(Spec<double>::shift_left(), Spec<double>::shift_right());
  // (L + R-on-odds): e_0 -> 0, e_2 -> e_0, e_1 -> e_3.
  CHECK(apply(*ds, DenseVector<double>::basis(0), kBig).size() == 0);
  CHECK(same_vector(apply(*ds, DenseVector<double>::basis(2), kBig), DenseVector<double>::basis(0)));
  CHECK(same_vector(apply(*ds, DenseVector<double>::basis(1), kBig), DenseVector<double>::basis(3)));
}

TEST_CASE("apply honours the output limit") {
  for (const auto& [name, op] : operator_catalog<double>()) {
    INFO(name);
    std::mt19937_64 gen(7);
    const auto x = random_vector<double>(gen, 13);
    const auto full = apply(*op, x, kBig);
    const auto cut = apply(*op, x, 4);
    CHECK(cut.size() <= 4);
    CHECK(same_vector(cut, head(full, std::min<std::size_t>(4, full.size()))));
  }
}

TEST_CASE("support propagation is sound") {
  std::mt19937_64 gen(11);
  for (const auto& [name, op] : operator_catalog<double>()) {
    INFO(name);
    const auto x = random_vector<double>(gen, 9);
    const std::size_t out_bound = output_support_bound(*op, x.size());
    const auto y = apply(*op, x, kBig);
    if (out_bound != unbounded_support) CHECK(y.size() <= out_bound);

    // Outputs below m must only read inputs below input_support_needed(.., m).
    for (std::size_t m : {1u, 3u, 8u}) {
      const std::size_t k = input_support_needed(*op, m);
      if (k == unbounded_support) continue;
      const auto from_head = apply(*op, head(x, std::min(k, x.size())), m);
      const auto direct = apply(*op, x, m);
      CHECK(same_vector(from_head, direct));
    }
  }
}

TEST_CASE("sections agree with application") {
  std::mt19937_64 gen(3);
  for (const auto& [name, op] : operator_catalog<double>()) {
    INFO(name);
    const std::size_t n = 12;
    const auto a = truncate(*op, n);
    const auto x = random_vector<double>(gen, n);
    const auto via_matrix = matvec(a, x);
    const auto via_apply = apply(*op, x, n);
    CHECK(distance(via_matrix, via_apply) < 1e-12);
  }
}

TEST_CASE("natural_rows sections capture full columns") {
  for (const auto& [name, op] : operator_catalog<double>()) {
    INFO(name);
    const std::size_t cols = 9;
    const std::size_t rows = natural_rows(*op, cols);
    REQUIRE(rows >= cols);
    const std::size_t bound = output_support_bound(*op, cols);
    if (bound != unbounded_support && bound <= 4 * cols + 64) {
      for (std::size_t j = 0; j < cols; ++j) {
        const auto col = apply(*op, DenseVector<double>::basis(j), kBig);
        CHECK(col.size() <= rows);  // nothing truncated away
      }
    }
  }
}

TEST_CASE("norm_bound dominates measured section norms") {
  for (const auto& [name, op] : operator_catalog<double>()) {
    INFO(name);
    const double nb = norm_bound(*op);
    CHECK(section_norm(*op, 24) <= nb + 1e-9);
  }
  // Exact leaf values.
  CHECK(norm_bound(*Spec<double>::shift_left()) == 1.0);
  CHECK(norm_bound(*diag_reciprocal<double>({3, 1})) == Approx(3.0));
  CHECK(norm_bound(*diag_constant<double>(2, {5})) == Approx(5.0));
  CHECK(norm_bound(*finite_projection<double>({})) == 0.0);
  // Rank-one x -> <x, z> e has norm ||z||.
  FiniteRankData<double> f;
  f.pairs.push_back({vec<double>({3, 4}), DenseVector<double>::basis(2)});
  CHECK(norm_bound(*Spec<double>::finite_rank(f)) == Approx(5.0));
}

TEST_CASE("tail bounds: one-sided and two-sided") {
  std::mt19937_64 gen(17);
  for (const auto& [name, op] : operator_catalog<double>()) {
    INFO(name);
    const std::size_t n = 10;
    const TailSides ts = tail_sides(*op, n);

    // right >= ||T restricted to coordinates >= n||.
    for (int t = 0; t < 5; ++t) {
      auto x = random_vector<double>(gen, n + 14);
      for (std::size_t k = 0; k < n; ++k) x.entries[k] = 0.0;
      const double nx = norm(x);
      if (nx == 0.0) continue;
      CHECK(norm(apply(*op, x, kBig)) <= ts.right * nx + 1e-9);
    }
    // left >= ||coordinates >= n of T x|| / ||x||.
    for (int t = 0; t < 5; ++t) {
      const auto x = random_vector<double>(gen, n + 14);
      auto y = apply(*op, x, kBig);
      for (std::size_t k = 0; k < std::min<std::size_t>(n, y.size()); ++k) y.entries[k] = 0.0;
      CHECK(norm(y) <= ts.left * norm(x) + 1e-9);
    }
    // Two-sided bound dominates a measured block-difference norm.
    const std::size_t m = 40;
    const auto full = section(*op, m, m);
    auto cut = section(*op, n, n);
    DenseMatrix<double> pt(m, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) pt.at(i, j) = cut.at(i, j);
    const auto diff = msub(full, pt);
    const auto sv = singular_values(diff);
    const double measured = sv.empty() ? 0.0 : sv.front();
    CHECK(measured <= tail_norm_bound_value(*op, n) + 1e-9);
  }
}

TEST_CASE("tail bounds: exact decay values and inadmissible trees") {
  // Reciprocal diagonal: tail at N is exactly 1/(N+1).
  auto d = diag_reciprocal<double>();
  auto tb = tail_norm_bound(*d, 10);
  REQUIRE(tb.has_value());
  CHECK(*tb == Approx(1.0 / 11.0));

  // Finite-rank data supported below 5 vanishes from N = 5 on.
  auto fr = sample_finite_rank<double>();
  auto tb_fr = tail_norm_bound(*fr, 10);
  REQUIRE(tb_fr.has_value());
  CHECK(*tb_fr == Approx(0.0).margin(1e-14));

  // Shifts and identity admit no decaying truncation bound.
  CHECK_FALSE(tail_norm_bound(*Spec<double>::shift_left(), 64).has_value());
  CHECK_FALSE(tail_norm_bound(*Spec<double>::identity(), 64).has_value());
  CHECK_FALSE(tail_norm_bound(*evens_subsequence<double>(), 64).has_value());

  // Composition sees through the shift: D_rec R has decaying tails.
  auto comp = Spec<double>::compose(diag_reciprocal<double>(), Spec<double>::shift_right());
  auto tb_c = tail_norm_bound(*comp, 100);
  REQUIRE(tb_c.has_value());
  CHECK(*tb_c < 0.021);
  // ... and in the other order too.
  auto comp2 = Spec<double>::compose(Spec<double>::shift_left(), diag_reciprocal<double>());
  auto tb_c2 = tail_norm_bound(*comp2, 100);
  REQUIRE(tb_c2.has_value());
  CHECK(*tb_c2 < 0.021);
}

TEST_CASE("adjoint_spec satisfies the pairing identity") {
  std::mt19937_64 gen(23);
  for (const auto& [name, op] : operator_catalog<cplx>()) {
    INFO(name);
    const auto adj = adjoint_spec<cplx>(op);
    for (int t = 0; t < 4; ++t) {
      const auto x = random_vector<cplx>(gen, 10);
      const auto y = random_vector<cplx>(gen, 30);
      const cplx lhs = inner_product(apply(*op, x, kBig), y);
      const cplx rhs = inner_product(x, apply(*adj, y, kBig));
      CHECK(abs_of(lhs - rhs) < 1e-9);
    }
  }
  // The explicit adjoint node agrees with the rewritten tree.
  for (const auto& [name, op] : operator_catalog<cplx>()) {
    INFO(name);
    const auto wrapped = Spec<cplx>::adjoint(op);
    const auto rewritten = adjoint_spec<cplx>(op);
    const auto x = random_vector<cplx>(gen, 12);
    CHECK(distance(apply(*wrapped, x, 40), apply(*rewritten, x, 40)) < 1e-9);
  }
}

TEST_CASE("adjoint_spec of finite rank is again well-formed finite rank") {
  auto fr = sample_finite_rank<cplx>();
  auto adj = adjoint_spec<cplx>(fr);
  REQUIRE(adj->kind() == OpKind::finite_rank);
  // Factory validated orthonormality of the new e's; rank must not grow.
  CHECK(adj->finite_rank_data().pairs.size() <= fr->finite_rank_data().pairs.size());
}

TEST_CASE("complexify preserves action") {
  std::mt19937_64 gen(29);
  for (const auto& [name, op] : operator_catalog<double>()) {
    INFO(name);
    const auto cx = complexify(op);
    const auto x = random_vector<double>(gen, 11);
    const auto yr = apply(*op, x, 33);
    const auto yc = apply(*cx, to_complex(x), 33);
    CHECK(distance(to_complex(yr), yc) < 1e-12);
  }
}

TEST_CASE("split_scalar recovers the scalar part") {
  using S = Spec<double>;
  {
    const auto sp = split_scalar<double>(S::identity());
    CHECK(sp.alpha == 1.0);
    CHECK(sp.rest->kind() == OpKind::zero);
  }
  {
    // Constant-tail diagonal: alpha = tail constant, rest finitely supported.
    const auto sp = split_scalar<double>(diag_constant<double>(2, {5, 3}));
    CHECK(sp.alpha == 2.0);
    REQUIRE(sp.rest->kind() == OpKind::diagonal);
    const auto& d = sp.rest->diagonal_data();
    CHECK(d.prefix == std::vector<double>({3.0, 1.0}));
    CHECK(d.tail == DiagonalTailRule::zero);
  }
  {
    // Complement-of-initial-segment projection = I - P_{0..2}.
    const auto sp = split_scalar<double>(cofinite_projection<double>(3));
    CHECK(sp.alpha == 1.0);
    CHECK(tail_norm_bound_value(*sp.rest, 3) == 0.0);
  }
  {
    // (2I + FR) o (3I + D) has scalar part 6.
    auto a = S::sum(S::scale(2.0, S::identity()), sample_finite_rank<double>());
    auto b = S::sum(S::scale(3.0, S::identity()), diag_finite<double>({1, -1}));
    const auto sp = split_scalar<double>(S::compose(a, b));
    CHECK(sp.alpha == Approx(6.0));
  }
  {
    // Equal scalar parts pass through a direct sum; unequal ones do not.
    auto same = S::direct_sum(diag_constant<double>(2, {7}), S::scale(2.0, S::identity()));
    CHECK(split_scalar<double>(same).alpha == 2.0);
    auto mixed = S::direct_sum(S::identity(), S::scale(2.0, S::identity()));
    CHECK(split_scalar<double>(mixed).alpha == 0.0);
  }

  // Semantic identity T x = alpha x + R x across the catalog.
  std::mt19937_64 gen(31);
  for (const auto& [name, op] : operator_catalog<double>()) {
    INFO(name);
    const auto sp = split_scalar<double>(op);
    const auto x = random_vector<double>(gen, 10);
    const auto lhs = apply(*op, x, 40);
    const auto rhs = add(scaled(sp.alpha, x), apply(*sp.rest, x, 40));
    CHECK(distance(lhs, rhs) < 1e-10);
  }
}

TEST_CASE("subtract_scalar folds lambda into the split") {
  auto op = Spec<double>::sum(Spec<double>::scale(2.0, Spec<double>::identity()),
                              diag_reciprocal<double>());
  const auto rest = subtract_scalar<double>(op, 2.0);
  // T - 2I is the reciprocal diagonal: structurally compact.
  const auto tb = tail_norm_bound(*rest, 99);
  REQUIRE(tb.has_value());
  CHECK(*tb == Approx(0.01));
  std::mt19937_64 gen(37);
  const auto x = random_vector<double>(gen, 8);
  const auto lhs = apply(*rest, x, 20);
  const auto rhs = sub(apply(*op, x, 20), scaled(2.0, x));
  CHECK(distance(lhs, rhs) < 1e-12);
}

TEST_CASE("extract_parameters surfaces tree data with embeddings") {
  {
    const auto ps = extract_parameters(*sample_finite_rank<double>());
    CHECK(ps.vectors.size() == 4);  // two z's and two e's
    CHECK(!ps.basis.empty());
    for (std::size_t i = 0; i < ps.basis.size(); ++i)
      for (std::size_t j = 0; j <= i; ++j)
        CHECK(std::abs(inner_product(ps.basis[i], ps.basis[j]) - (i == j ? 1.0 : 0.0)) < 1e-9);
    CHECK(ps.support >= 4);
  }
  {
    // Left child of a direct sum lands on even coordinates.
    FiniteRankData<double> f;
    f.pairs.push_back({vec<double>({0, 1}), DenseVector<double>::basis(0)});
    auto ds = Spec<double>::direct_sum(Spec<double>::finite_rank(f), Spec<double>::zero());
    const auto ps = extract_parameters(*ds);
    REQUIRE(ps.vectors.size() == 2);
    CHECK(same_vector(ps.vectors[0], vec<double>({0, 0, 1})));  // z embedded to index 2
  }
  {
    // Projections contribute basis vectors of their target set.
    const auto ps = extract_parameters(*even_projection<double>());
    REQUIRE(!ps.vectors.empty());
    CHECK(same_vector(ps.vectors[0], DenseVector<double>::basis(0)));
    CHECK(same_vector(ps.vectors[1], DenseVector<double>::basis(2)));
  }
}

TEST_CASE("linearity_check passes across the catalog") {
  for (const auto& [name, op] : operator_catalog<double>()) {
    INFO(name);
    CHECK(linearity_check(*op).pass);
  }
  for (const auto& [name, op] : operator_catalog<cplx>()) {
    INFO(name);
    CHECK(linearity_check(*op).pass);
  }
}

TEST_CASE("structural validation rejects malformed nodes") {
  SubsequenceData bad1;
  bad1.prefix = {3, 3};
  bad1.start = 5;
  CHECK_THROWS_AS(Spec<double>::subsequence(bad1), std::invalid_argument);
  SubsequenceData bad2;
  bad2.prefix = {3};
  bad2.start = 2;  // must exceed prefix
  CHECK_THROWS_AS(Spec<double>::subsequence(bad2), std::invalid_argument);
  SubsequenceData bad3;
  bad3.start = 0;
  bad3.step = 0;
  CHECK_THROWS_AS(Spec<double>::subsequence(bad3), std::invalid_argument);
  CHECK_THROWS_AS(Spec<double>::scale(1.0, nullptr), std::invalid_argument);
}

TEST_CASE("JSON round trip is bit-exact and semantics-preserving") {
  std::mt19937_64 gen(41);
  for (const auto& [name, op] : operator_catalog<double>()) {
    INFO(name);
    const json doc = document_to_json(*op);
    const ParsedOperator back = parse_operator_text(doc.dump());
    REQUIRE(back.field == Field::real);
    CHECK(document_to_json(*back.real_spec).dump() == doc.dump());
    const auto x = random_vector<double>(gen, 10);
    CHECK(distance(apply(*op, x, 40), apply(*back.real_spec, x, 40)) == 0.0);
  }
  for (const auto& [name, op] : operator_catalog<cplx>()) {
    INFO(name);
    const json doc = document_to_json(*op);
    const ParsedOperator back = parse_operator_text(doc.dump());
    REQUIRE(back.field == Field::complex);
    CHECK(document_to_json(*back.complex_spec).dump() == doc.dump());
  }
}

TEST_CASE("JSON parsing rejects malformed documents") {
  CHECK_THROWS_AS(parse_operator_text("{"), std::invalid_argument);
  CHECK_THROWS_AS(parse_operator_text(R"({"field":"real"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_operator_text(R"({"field":"quaternion","operator":{"kind":"zero"}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_operator_text(R"({"field":"real","operator":{"kind":"wibble"}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      parse_operator_text(R"({"field":"real","operator":{"kind":"scale","factor":[1,2],"inner":{"kind":"zero"}}})"),
      std::invalid_argument);  // complex scalar in a real document
  CHECK_THROWS_AS(
      parse_operator_text(R"({"field":"real","operator":{"kind":"coordinate_subsequence","start":0,"step":0}})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_operator_text(R"({"field":"real","operator":{"kind":"projection","target":"finite_set","indices":[-1]}})"),
      std::invalid_argument);
  // Complex scalars parse from [re, im] arrays.
  const auto ok = parse_operator_text(
      R"({"field":"complex","operator":{"kind":"scale","factor":[0,1],"inner":{"kind":"identity"}}})");
  REQUIRE(ok.field == Field::complex);
  CHECK(abs_of(ok.complex_spec->factor() - cplx(0, 1)) == 0.0);
}
