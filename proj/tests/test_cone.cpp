#include <doctest.h>

#include "helpers.hpp"

using namespace th;

TEST_SUITE("cone") {

TEST_CASE("membership on the orthant, the gbit and the qubit") {
  auto m = r2();
  CHECK(cone_contains(m, v2(0.3, 0.7)));
  CHECK_FALSE(cone_contains(m, v2(-0.1, 0.7)));

  auto g = gbit();
  CHECK(cone_contains(g, v3(0.5, 0.5, 0)));       // facet values all >= 0
  CHECK_FALSE(cone_contains(g, v3(0.5, 0.6, 0)));  // 0.5 - 0.6 < 0

  auto q = qubit();
  CHECK_FALSE(cone_contains(q, coords_from_hermitian(cm2(1, 0, 0, -0.01))));
  CHECK(cone_contains(q, coords_from_hermitian(cm2(1, 0, 0, 0))));
  CHECK_THROWS_AS(cone_contains(m, v3(1, 0, 0)), std::invalid_argument);
}

TEST_CASE("leq is membership of the difference") {
  auto m = r2();
  CHECK(leq(m, v2(0.2, 0.3), v2(0.2, 0.5)));
  CHECK_FALSE(leq(m, v2(0.2, 0.3), v2(0.3, 0.2)));
  CHECK_FALSE(leq(m, v2(0.3, 0.2), v2(0.2, 0.3)));  // incomparable both ways
  auto q = qubit();
  CHECK(leq(q, coords_from_hermitian(cm2(0.5, 0, 0, 0.5)), q->unit()));
}

TEST_CASE("orthogonality and the partial sum") {
  auto m = r2();
  auto a = eff(m, {0.4, 0.4});
  auto b = eff(m, {0.6, 0.6});
  CHECK(effect_perp(a, b));
  CHECK_FALSE(effect_perp(eff(m, {0.7, 0.1}), eff(m, {0.4, 0.1})));
  CHECK(effect_perp(a, complement(a)));

  CHECK(linf(effect_add(eff(m, {0.2, 0.1}), eff(m, {0.3, 0.4})).vector -
             v2(0.5, 0.5)) < 1e-15);
  CHECK(linf(effect_add(a, zero_effect(m)).vector - a.vector) == 0);
  CHECK_THROWS_AS(effect_add(eff(m, {0.7, 0.1}), eff(m, {0.4, 0.1})),
                  std::invalid_argument);

  auto q = qubit();
  auto half = Effect<double>(q, Vec<double>(0.5 * q->unit()));
  CHECK(linf(effect_add(half, half).vector - q->unit()) < 1e-15);
}

TEST_CASE("scaling and complement") {
  auto m = r2();
  auto a = eff(m, {1, 0});
  CHECK(linf(effect_scale(0.0, a).vector) == 0);
  CHECK(linf(effect_scale(1.0, a).vector - a.vector) == 0);
  CHECK(linf(effect_scale(0.5, a).vector - v2(0.5, 0)) == 0);
  CHECK_THROWS_AS(effect_scale(1.5, a), std::invalid_argument);
  CHECK_THROWS_AS(effect_scale(-0.1, a), std::invalid_argument);

  CHECK(linf(complement(zero_effect(m)).vector - m->unit()) == 0);
  CHECK(linf(complement(eff(m, {0.3, 0.8})).vector - v2(0.7, 0.2)) < 1e-15);
  auto b = eff(m, {0.3, 0.8});
  CHECK(linf(complement(complement(b)).vector - b.vector) < 1e-15);
}

TEST_CASE("partial order up to tolerance") {
  std::mt19937_64 rng(11);
  for (auto m : {r2(), r3(), gbit()}) {
    for (int i = 0; i < 50; ++i) {
      auto a = sample_effect(m, rng);
      auto b = sample_effect(m, rng);
      auto c = sample_effect(m, rng);
      CHECK(leq(m, a.vector, a.vector));
      if (leq(m, a.vector, b.vector) && leq(m, b.vector, a.vector))
        CHECK(linf(a.vector - b.vector) <= 2 * m->tol());
      if (leq(m, a.vector, b.vector) && leq(m, b.vector, c.vector))
        CHECK(leq(m, a.vector, c.vector));
      if (leq(m, a.vector, b.vector))
        CHECK(leq(m, complement(b).vector, complement(a).vector));
      if (effect_perp(a, b)) {
        auto sum = effect_add(a, b);  // constructor re-checks the invariants
        CHECK(cone_contains(m, sum.vector));
      }
    }
  }
}

TEST_CASE("facet membership agrees with generator membership via LP") {
  std::mt19937_64 rng(12);
  for (auto m : {r3(), gbit()}) {
    const auto& gen = m->generators();
    std::normal_distribution<double> gauss(0, 1);
    int agreed = 0;
    for (int i = 0; i < 1000; ++i) {
      Vec<double> x(m->dim());
      for (Index k = 0; k < x.size(); ++k) x[k] = gauss(rng);
      if (i % 3 == 0) x = sample_cone_vector(m, rng);  // exercise members too

      LPProblem<double> p;  // x = G t with t >= 0
      const Index n = gen.cols();
      p.blocks.push_back({n, Mat<double>::Identity(n, n)});
      p.eq = gen;
      p.rhs = x;
      const bool by_generators =
          solve_feasibility(p).status == FeasStatus::Feasible;
      const bool by_facets = cone_contains(m, x);
      if (by_generators == by_facets) ++agreed;
    }
    CHECK(agreed == 1000);
  }
}

TEST_CASE("constructors reject degenerate data") {
  Mat<double> id2 = Mat<double>::Identity(2, 2);
  // unit must be nonzero and inside the cone
  CHECK_THROWS_AS(ConeModel<double>::polyhedral(id2, id2, v2(0, 0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConeModel<double>::polyhedral(id2, id2, v2(-1, 1)),
                  std::invalid_argument);
  // generator outside the facet description
  Mat<double> bad_gen(2, 2);
  bad_gen << 1, -1, 0, 1;
  CHECK_THROWS_AS(ConeModel<double>::polyhedral(bad_gen, id2, v2(1, 1)),
                  std::invalid_argument);
  // half-plane: not pointed (single facet)
  Mat<double> half(1, 2);
  half << 1, 0;
  Mat<double> span(2, 3);
  span << 1, 0, 0, 0, 1, -1;
  CHECK_THROWS_AS(ConeModel<double>::polyhedral(span, half, v2(1, 0)),
                  std::invalid_argument);
  // generators that do not span V
  Mat<double> thin(2, 1);
  thin << 1, 0;
  CHECK_THROWS_AS(ConeModel<double>::polyhedral(thin, id2, v2(1, 1)),
                  std::invalid_argument);
  // unit on the boundary is not an order unit for the orthant
  CHECK_THROWS_AS(ConeModel<double>::polyhedral(id2, id2, v2(1, 0)),
                  std::invalid_argument);
  // mismatched facet/generator width
  Mat<double> wide(3, 2);
  CHECK_THROWS_AS(ConeModel<double>::polyhedral(id2, wide, v2(1, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConeModel<double>::psd(0), std::invalid_argument);
}

TEST_CASE("effect constructor enforces the interval") {
  auto m = r2();
  CHECK_THROWS_AS(Effect<double>(m, v2(-0.1, 0.5)), std::invalid_argument);
  CHECK_THROWS_AS(Effect<double>(m, v2(1.1, 0.5)), std::invalid_argument);
  CHECK_THROWS_AS(Effect<double>(m, v3(0.1, 0.1, 0.1)), std::invalid_argument);
}

TEST_CASE("hermitian realification is an isometric round trip") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0, 1);
  for (Index n : {2, 3, 4}) {
    CMat<double> g(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) g(i, j) = {gauss(rng), gauss(rng)};
    CMat<double> h = (g + g.adjoint()) / 2;
    CMat<double> h2 = (CMat<double>((g * g.adjoint())) + CMat<double>((g * g.adjoint())).adjoint()) / 2;
    const Vec<double> x = coords_from_hermitian(h);
    const Vec<double> y = coords_from_hermitian(h2);
    CHECK((hermitian_from_coords(x, n) - h).cwiseAbs().maxCoeff() < 1e-12);
    // trace inner product becomes the euclidean dot product
    CHECK(std::abs(x.dot(y) - (h * h2).trace().real()) < 1e-9);
  }
}

TEST_CASE("matrix square root") {
  CMat<double> id = CMat<double>::Identity(2, 2);
  CHECK((matrix_sqrt(id) - id).cwiseAbs().maxCoeff() < 1e-12);
  CMat<double> d = cm2(4, 0, 0, 9);
  CHECK((matrix_sqrt(d) - cm2(2, 0, 0, 3)).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(14);
  std::normal_distribution<double> gauss(0, 1);
  for (int t = 0; t < 10; ++t) {
    CMat<double> g(3, 3);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) g(i, j) = {gauss(rng), gauss(rng)};
    CMat<double> a = g * g.adjoint();
    CMat<double> r = matrix_sqrt(a);
    CHECK((r * r - a).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK_THROWS_AS(matrix_sqrt(cm2(0, 1, 0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(matrix_sqrt(cm2(-1, 0, 0, 1)), std::invalid_argument);
}

}  // TEST_SUITE
