#include <doctest.h>

#include "effalg/scenario.hpp"
#include "helpers.hpp"

using namespace th;
using effalg::json;

namespace {

json base_doc() {
  return json::parse(R"({
    "version": "1",
    "models": {
      "bit": {"kind": "polyhedral",
              "generators": [[1,0],[0,1]],
              "facets": [[1,0],[0,1]],
              "unit": [1,1]},
      "qubit": {"kind": "psd", "hilbert_dim": 2}
    },
    "effects": {
      "a": {"model": "bit", "vector": [1.0, 0.3]},
      "ac": {"model": "bit", "vector": [0.0, 0.7]},
      "p0": {"model": "qubit", "matrix": [[[1,0],[0,0]],[[0,0],[0,0]]]}
    },
    "states": {
      "top": {"model": "bit", "covector": [1, 0]},
      "uniform": {"model": "bit", "covector": [0.5, 0.5]},
      "rho": {"model": "qubit", "density": [[[0.25,0],[0,0]],[[0,0],[0.75,0]]]}
    },
    "observables": {
      "A": {"model": "bit", "outcomes": ["0","1"],
            "effects": [[0.7,0.2],[0.3,0.8]]}
    },
    "operations": {
      "h": {"type": "pure_holevo", "effect": "a", "state": "uniform"},
      "cc": {"type": "constant", "source": "bit", "state": "top"},
      "raw": {"source": "bit", "target": "bit",
              "dual_matrix": [[0.5,0],[0,0.5]]},
      "flip": {"type": "kraus", "model": "qubit",
               "matrices": [[[[0,0],[1,0]],[[1,0],[0,0]]]]}
    },
    "instruments": {
      "I": {"type": "holevo_instrument", "observable": "A",
            "states": ["top", "uniform"]},
      "plain": {"outcomes": ["0","1"],
                "operations": ["h", {"type": "mixed_holevo",
                                     "terms": [{"effect": "ac", "state": "top"}]}]}
    },
    "checks": [
      {"type": "channel", "operation": "cc", "expect": true},
      {"type": "repeatable", "effect": "a", "expect": true},
      {"type": "coexist", "a": "A", "b": "A", "expect": "feasible"}
    ]
  })");
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("a full document loads with every object validated") {
  auto sc = parse_scenario(base_doc());
  CHECK(sc.models.size() == 2);
  CHECK(sc.effects.size() == 3);
  CHECK(sc.states.size() == 3);
  CHECK(sc.observables.size() == 1);
  CHECK(sc.operations.size() == 4);
  CHECK(sc.instruments.size() == 2);
  CHECK(sc.checks.size() == 3);

  CHECK(evaluate(sc.state("rho"), sc.effect("p0")) == doctest::Approx(0.25));
  CHECK(is_channel(sc.operation("cc")));
  CHECK(linf(measured_effect(sc.operation("h")).vector - v2(1.0, 0.3)) < 1e-12);
  // the plain instrument resolved one op by name and one inline
  CHECK(linf(sc.instrument("plain").ops[0].dual() - sc.operation("h").dual()) == 0);
  // kraus bit flip: dual sends |0><0| to |1><1|
  auto q = sc.model("qubit");
  auto e0 = effect_from_matrix(q, proj0());
  CHECK(linf(dual_apply(sc.operation("flip"), e0).vector -
             coords_from_hermitian(proj1())) < 1e-10);
}

TEST_CASE("unknown fields and bad versions are input errors") {
  auto doc = base_doc();
  doc["surprise"] = 1;
  CHECK_THROWS_WITH_AS(parse_scenario(doc), doctest::Contains("unknown field"),
                       ScenarioError);

  auto doc2 = base_doc();
  doc2["version"] = "2";
  CHECK_THROWS_AS(parse_scenario(doc2), ScenarioError);

  auto doc3 = base_doc();
  doc3["effects"]["a"]["extra"] = true;
  CHECK_THROWS_AS(parse_scenario(doc3), ScenarioError);

  try {
    parse_scenario(doc3);
  } catch (const ScenarioError& e) {
    CHECK(e.exit_code == 2);
  }
}

TEST_CASE("invariant violations carry exit code 1 and the object name") {
  auto doc = base_doc();
  doc["effects"]["bad"] = {{"model", "bit"}, {"vector", {1.4, 0.0}}};
  try {
    parse_scenario(doc);
    FAIL("expected a scenario error");
  } catch (const ScenarioError& e) {
    CHECK(e.exit_code == 1);
    CHECK(std::string(e.what()).find("effects.bad") != std::string::npos);
  }

  auto doc2 = base_doc();
  doc2["operations"]["h"]["state"] = "missing";
  try {
    parse_scenario(doc2);
    FAIL("expected a scenario error");
  } catch (const ScenarioError& e) {
    CHECK(e.exit_code == 2);  // unresolved name is an input error
  }
}

TEST_CASE("tolerance override reaches the models") {
  auto sc = parse_scenario(base_doc(), 1e-5);
  CHECK(sc.model("bit")->tol() == doctest::Approx(1e-5));
  CHECK(sc.model("qubit")->tol() == doctest::Approx(1e-5));
}

TEST_CASE("model serialization round-trips") {
  for (auto m : {r2(), gbit()}) {
    auto j = j_model(m);
    auto back = detail::parse_model(j, "models.rt", {});
    CHECK(back->dim() == m->dim());
    CHECK(linf(back->unit() - m->unit()) == 0);
    CHECK(linf(back->generators() - m->generators()) == 0);
    CHECK(linf(back->facets() - m->facets()) == 0);
  }
  auto q = qubit();
  auto back = detail::parse_model(j_model(q), "models.rt", {});
  CHECK(back->kind() == ConeKind::Psd);
  CHECK(back->hilbertDim() == 2);
}

TEST_CASE("numbers are emitted through a fixed format") {
  CHECK(j_num(0.1 + 0.2).dump() == "0.3");
  CHECK(j_num(1.0).dump() == "1.0");
  CHECK(j_num(1.0 / 3.0).dump() == "0.333333333333");
}

}  // TEST_SUITE
