#include <doctest.h>

#include "helpers.hpp"

using namespace th;

namespace {

// classical product bi-observable: coordinatewise products on the simplex
BiObservable<double> product_grid(const Observable<double>& a,
                                  const Observable<double>& b) {
  std::vector<Effect<double>> cells;
  for (size_t x = 0; x < a.effects.size(); ++x)
    for (size_t y = 0; y < b.effects.size(); ++y)
      cells.emplace_back(a.model(), Vec<double>(a.effects[x].vector.cwiseProduct(
                                        b.effects[y].vector)));
  return BiObservable<double>(a.outcomes, b.outcomes, std::move(cells));
}

}  // namespace

TEST_SUITE("instrument") {

TEST_CASE("operation-valued measure") {
  auto m = r2();
  std::mt19937_64 rng(61);
  auto a = sample_observable(m, 3, rng);
  std::vector<State<double>> betas = {sample_state(m, rng), sample_state(m, rng),
                                      sample_state(m, rng)};
  auto ins = pure_holevo_instrument(a, betas);

  CHECK(linf(ovm(ins, {}).dual()) == 0);
  CHECK(is_channel(ovm(ins, ins.outcomes)));
  CHECK(linf(ovm(ins, {"x1"}).dual() - ins.ops[1].dual()) == 0);
  CHECK_THROWS_AS(ovm(ins, {"zz"}), std::invalid_argument);
  // additivity over a disjoint split
  CHECK(linf(ovm(ins, {"x0", "x2"}).dual() -
             (ins.ops[0].dual() + ins.ops[2].dual())) == 0);
}

TEST_CASE("measured observables") {
  auto m = r2();
  std::mt19937_64 rng(62);
  auto a = sample_observable(m, 2, rng);
  auto ins = pure_holevo_instrument(a, {sample_state(m, rng), sample_state(m, rng)});
  auto ahat = measured_observable(ins);
  for (size_t x = 0; x < 2; ++x)
    CHECK(linf(ahat.effects[x].vector - a.effects[x].vector) < 1e-12);

  // single-outcome channel instrument measures the trivial observable
  Instrument<double> one({"u"}, {constant_channel(m, sample_state(m, rng))});
  CHECK(linf(measured_observable(one).effects[0].vector - m->unit()) < 1e-12);

  // mixed holevo: measured observable is the weight mixture
  auto a2 = sample_observable(m, 2, rng);
  std::vector<std::vector<State<double>>> tables = {
      {sample_state(m, rng), sample_state(m, rng)},
      {sample_state(m, rng), sample_state(m, rng)}};
  auto mixed = mixed_holevo_instrument<double>({0.3, 0.7}, {a, a2}, tables);
  auto mhat = measured_observable(mixed);
  for (size_t x = 0; x < 2; ++x)
    CHECK(linf(mhat.effects[x].vector -
               (0.3 * a.effects[x].vector + 0.7 * a2.effects[x].vector)) < 1e-12);
}

TEST_CASE("instrument distribution equals the measured distribution") {
  auto g = gbit();
  std::mt19937_64 rng(63);
  auto a = gbit_x(g);
  auto ins = pure_holevo_instrument(a, {sample_state(g, rng), sample_state(g, rng)});
  for (int i = 0; i < 10; ++i) {
    auto s = sample_state(g, rng);
    auto p = instrument_distribution(ins, s);
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(linf(p - distribution(a, s)) < 1e-12);
  }
}

TEST_CASE("instrument invariant rejects non-channel sums") {
  auto m = r2();
  auto beta = st(m, {0.5, 0.5});
  auto a = eff(m, {0.3, 0.3});
  CHECK_THROWS_AS(Instrument<double>({"x"}, {pure_holevo(a, beta)}),
                  std::invalid_argument);
}

TEST_CASE("composition of holevo instruments is a holevo bi-instrument") {
  auto m1 = r2();
  auto m2 = r3();
  auto m3 = gbit();
  std::mt19937_64 rng(64);
  auto a = sample_observable(m1, 2, rng);
  auto b = sample_observable(m2, 2, rng);
  std::vector<State<double>> alphas = {sample_state(m2, rng), sample_state(m2, rng)};
  std::vector<State<double>> betas = {sample_state(m3, rng), sample_state(m3, rng)};
  auto hi = pure_holevo_instrument(a, alphas);
  auto hj = pure_holevo_instrument(b, betas);
  auto k = compose_instruments(hi, hj);

  for (Index x = 0; x < 2; ++x)
    for (Index y = 0; y < 2; ++y) {
      const double w =
          alphas[static_cast<size_t>(x)].covector.dot(b.effects[static_cast<size_t>(y)].vector);
      // (H^(A,alpha) o H^(B,beta))_xy = H^((AoB)_xy, beta_y)
      const Mat<double> expect = w * a.effects[static_cast<size_t>(x)].vector *
                                 betas[static_cast<size_t>(y)].covector;
      CHECK(linf(k.cell(x, y).dual() - expect) < 1e-12);
      // measured bi-observable: (I o J)^_xy = Ix*(J^_y)
      CHECK(linf(measured_bi_observable(k).cell(x, y).vector -
                 w * a.effects[static_cast<size_t>(x)].vector) < 1e-12);
    }

  // measured observable of the first marginal is A exactly
  auto [mi, mj] = marginal_instruments(k);
  auto ahat = measured_observable(mi);
  for (size_t x = 0; x < 2; ++x)
    CHECK(linf(ahat.effects[x].vector - a.effects[x].vector) < 1e-12);
}

TEST_CASE("composing with a single-outcome identity instrument changes nothing") {
  auto m = r2();
  std::mt19937_64 rng(65);
  auto a = sample_observable(m, 2, rng);
  auto ins = pure_holevo_instrument(a, {sample_state(m, rng), sample_state(m, rng)});
  Instrument<double> id({"*"}, {identity_operation(m)});
  auto k = compose_instruments(ins, id);
  for (Index x = 0; x < 2; ++x)
    CHECK(linf(k.cell(x, 0).dual() - ins.ops[static_cast<size_t>(x)].dual()) == 0);
  auto k2 = compose_instruments(id, ins);
  for (Index y = 0; y < 2; ++y)
    CHECK(linf(k2.cell(0, y).dual() - ins.ops[static_cast<size_t>(y)].dual()) == 0);
  CHECK_THROWS_AS(compose_instruments(ins, pure_holevo_instrument(
                                               sample_observable(r3(), 2, rng),
                                               {sample_state(m, rng), sample_state(m, rng)})),
                  std::invalid_argument);
}

TEST_CASE("instruments coexist with themselves") {
  auto m = r2();
  std::mt19937_64 rng(66);
  auto a = sample_observable(m, 2, rng);
  auto ins = pure_holevo_instrument(a, {sample_state(m, rng), sample_state(m, rng)});
  auto res = instruments_coexist(ins, ins);
  REQUIRE(res.decision == Decision::Yes);
  CHECK(verify_joint_instrument(ins, ins, *res.witness));
}

TEST_CASE("measure-and-prepare instruments with one preparation coexist") {
  auto m = r3();
  std::mt19937_64 rng(67);
  auto beta = sample_state(m, rng);
  auto a = sample_observable(m, 2, rng);
  auto b = sample_observable(m, 2, rng);
  std::vector<State<double>> ba = {beta, beta};
  auto i = pure_holevo_instrument(a, ba);
  auto j = pure_holevo_instrument(b, ba);

  auto res = instruments_coexist(i, j);
  REQUIRE(res.decision == Decision::Yes);
  CHECK(verify_joint_instrument(i, j, *res.witness));

  // independent product witness: prepare beta after the classical joint grid
  auto grid = product_grid(a, b);
  std::vector<Operation<double>> cells;
  for (const auto& c : grid.cells) cells.push_back(pure_holevo(c, beta));
  BiInstrument<double> k(grid.outcomes1, grid.outcomes2, cells);
  CHECK(verify_joint_instrument(i, j, k));
  CHECK(instruments_coexist(i, j, &k).decision == Decision::Yes);
  CHECK(coexistence_propagates(i, j, k));
}

TEST_CASE("coexistence propagates from instruments to observables") {
  auto m = r3();
  std::mt19937_64 rng(68);
  for (int t = 0; t < 10; ++t) {
    auto a = sample_observable(m, 2, rng);
    auto b = sample_observable(m, 2, rng);
    auto grid = product_grid(a, b);
    std::vector<Operation<double>> cells;
    for (const auto& c : grid.cells)
      cells.push_back(pure_holevo(c, sample_state(m, rng)));
    BiInstrument<double> k(grid.outcomes1, grid.outcomes2, cells);
    auto [i, j] = marginal_instruments(k);
    CHECK(coexistence_propagates(i, j, k));
  }
  // a corrupted witness is rejected up front
  auto a = sample_observable(m, 2, rng);
  auto i1 = pure_holevo_instrument(a, {sample_state(m, rng), sample_state(m, rng)});
  auto i2 = pure_holevo_instrument(a, {sample_state(m, rng), sample_state(m, rng)});
  std::vector<Operation<double>> diag;
  for (Index x = 0; x < 2; ++x)
    for (Index y = 0; y < 2; ++y)
      diag.push_back(x == y ? i1.ops[static_cast<size_t>(x)]
                            : zero_operation(m, m));
  BiInstrument<double> bad({"x0", "x1"}, {"x0", "x1"}, diag);
  CHECK_THROWS_AS(coexistence_propagates(i1, i2, bad), std::invalid_argument);
}

TEST_CASE("the converse of observable propagation fails") {
  // identity-preparing vs flip-preparing measure instruments on a classical
  // bit: both measure the sharp observable, but no joint bi-instrument exists
  // because their channel sums differ.
  auto m = r2();
  Observable<double> a({"0", "1"}, {eff(m, {1, 0}), eff(m, {0, 1})});
  auto s0 = st(m, {1, 0});
  auto s1 = st(m, {0, 1});
  auto i = pure_holevo_instrument(a, {s0, s1});
  auto j = pure_holevo_instrument(a, {s1, s0});

  auto obs = observables_coexist(measured_observable(i), measured_observable(j));
  CHECK(obs.decision == Decision::Yes);

  auto res = instruments_coexist(i, j);
  REQUIRE(res.decision == Decision::No);
  REQUIRE(res.feasibility.has_value());
  CHECK(verify_certificate(instrument_coexistence_lp(i, j), *res.feasibility));
}

TEST_CASE("sequential product of observables") {
  auto m = r2();
  Observable<double> a({"x1", "x2"}, {eff(m, {0.7, 0.2}), eff(m, {0.3, 0.8})});
  Observable<double> b({"y1", "y2"}, {eff(m, {0.5, 0.1}), eff(m, {0.5, 0.9})});
  std::vector<State<double>> betas = {st(m, {0.8, 0.2}), st(m, {0.3, 0.7})};
  auto ins = pure_holevo_instrument(a, betas);

  auto grid = sequential_product_observables(a, ins, b);
  // hand-computed: beta_x(B_y) times A_x
  CHECK(linf(grid.cell(0, 0).vector - v2(0.294, 0.084)) < 1e-12);
  CHECK(linf(grid.cell(0, 1).vector - v2(0.406, 0.116)) < 1e-12);
  CHECK(linf(grid.cell(1, 0).vector - v2(0.066, 0.176)) < 1e-12);
  CHECK(linf(grid.cell(1, 1).vector - v2(0.234, 0.624)) < 1e-12);

  auto [m1, m2] = marginals(grid);
  for (size_t x = 0; x < 2; ++x)
    CHECK(linf(m1.effects[x].vector - a.effects[x].vector) < 1e-12);
  CHECK(linf(m2.effects[0].vector - v2(0.36, 0.26)) < 1e-12);
  CHECK(linf(m2.effects[1].vector - v2(0.64, 0.74)) < 1e-12);

  // second marginal is the conditioned observable
  auto cond = condition_observable(b, a, ins);
  for (size_t y = 0; y < 2; ++y)
    CHECK(linf(cond.effects[y].vector - m2.effects[y].vector) == 0);

  // B trivial: the grid collapses to A in one column
  auto gtrivial = sequential_product_observables(a, ins, trivial_observable(m));
  for (Index x = 0; x < 2; ++x)
    CHECK(linf(gtrivial.cell(x, 0).vector -
               a.effects[static_cast<size_t>(x)].vector) < 1e-12);
  auto ctriv = condition_observable(trivial_observable(m), a, ins);
  CHECK(linf(ctriv.effects[0].vector - m->unit()) < 1e-12);

  // the instrument must measure A
  Observable<double> other({"x1", "x2"}, {eff(m, {0.5, 0.5}), eff(m, {0.5, 0.5})});
  CHECK_THROWS_AS(sequential_product_observables(other, ins, b),
                  std::invalid_argument);
}

TEST_CASE("grid marginals identity for random instruments") {
  std::mt19937_64 rng(69);
  for (auto m : {r2(), gbit()})
    for (int t = 0; t < 10; ++t) {
      auto a = sample_observable(m, 2, rng);
      auto ins =
          pure_holevo_instrument(a, {sample_state(m, rng), sample_state(m, rng)});
      auto b = sample_observable(m, 3, rng);
      auto grid = sequential_product_observables(a, ins, b);
      auto [m1, m2] = marginals(grid);
      for (size_t x = 0; x < 2; ++x)
        CHECK(linf(m1.effects[x].vector - a.effects[x].vector) < 1e-9);
      auto cond = condition_observable(b, a, ins);
      for (size_t y = 0; y < 3; ++y)
        CHECK(linf(m2.effects[y].vector - cond.effects[y].vector) < 1e-12);
      // A and B|[I]A coexist with joint A[I]B
      CHECK(verify_joint_observable(a, cond, grid));
    }
}

}  // TEST_SUITE
