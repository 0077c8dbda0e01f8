#ifndef EFFALG_SCENARIO_HPP
#define EFFALG_SCENARIO_HPP

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "effalg/hilbert.hpp"
#include "effalg/holevo.hpp"
#include "effalg/instrument.hpp"
#include "effalg/observable.hpp"

namespace effalg {

using nlohmann::json;

/// Input problems are reported with exit code 2, failed invariants and
/// failed checks with exit code 1.
struct ScenarioError : std::runtime_error {
  int exit_code;
  ScenarioError(int code, const std::string& msg)
      : std::runtime_error(msg), exit_code(code) {}
};

// ---------------------------------------------------------------------------
// serialization helpers; all floats pass through %.12g for stable output

inline json j_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return json(std::stod(buf));
}

inline json j_vec(const Vec<double>& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(j_num(v[i]));
  return a;
}

inline json j_rowvec(const RowVec<double>& v) { return j_vec(v.transpose()); }

inline json j_mat(const Mat<double>& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(j_num(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json j_cmat(const CMat<double>& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j)
      row.push_back(json::array({j_num(m(i, j).real()), j_num(m(i, j).imag())}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json j_model(const ConeModelPtr<double>& m) {
  if (m->kind() == ConeKind::Psd)
    return json{{"kind", "psd"}, {"hilbert_dim", m->hilbertDim()}};
  json gens = json::array(), facs = json::array();
  for (Index c = 0; c < m->generators().cols(); ++c)
    gens.push_back(j_vec(m->generators().col(c)));
  for (Index r = 0; r < m->facets().rows(); ++r)
    facs.push_back(j_rowvec(m->facets().row(r)));
  return json{{"kind", "polyhedral"},
              {"generators", std::move(gens)},
              {"facets", std::move(facs)},
              {"unit", j_vec(m->unit())}};
}

inline json j_observable(const Observable<double>& a) {
  json eff = json::array();
  for (const auto& e : a.effects) eff.push_back(j_vec(e.vector));
  return json{{"outcomes", a.outcomes}, {"effects", std::move(eff)}};
}

inline json j_bi_observable(const BiObservable<double>& c) {
  json cells = json::array();
  for (const auto& e : c.cells) cells.push_back(j_vec(e.vector));
  return json{{"outcomes1", c.outcomes1},
              {"outcomes2", c.outcomes2},
              {"cells", std::move(cells)}};
}

inline json j_operation(const Operation<double>& op) {
  return json{{"dual_matrix", j_mat(op.dual())}};
}

// ---------------------------------------------------------------------------
// parsing

namespace detail {

inline void expect_keys(const json& j, std::initializer_list<const char*> allowed,
                        const std::string& where) {
  if (!j.is_object()) throw ScenarioError(2, where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (key == k) ok = true;
    if (!ok) throw ScenarioError(2, where + ": unknown field '" + key + "'");
  }
}

inline const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ScenarioError(2, where + ": missing field '" + key + "'");
  return *it;
}

inline Vec<double> parse_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw ScenarioError(2, where + ": expected an array of numbers");
  Vec<double> v(static_cast<Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ScenarioError(2, where + ": expected a number");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Mat<double> parse_mat(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ScenarioError(2, where + ": expected a nonempty array of rows");
  const Index rows = static_cast<Index>(j.size());
  Vec<double> first = parse_vec(j[0], where);
  Mat<double> m(rows, first.size());
  m.row(0) = first.transpose();
  for (Index i = 1; i < rows; ++i) {
    Vec<double> row = parse_vec(j[static_cast<size_t>(i)], where);
    if (row.size() != m.cols()) throw ScenarioError(2, where + ": ragged matrix");
    m.row(i) = row.transpose();
  }
  return m;
}

inline CMat<double> parse_cmat(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ScenarioError(2, where + ": expected a nonempty complex matrix");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  CMat<double> m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw ScenarioError(2, where + ": ragged complex matrix");
    for (Index c = 0; c < cols; ++c) {
      const auto& cell = row[static_cast<size_t>(c)];
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
          !cell[1].is_number())
        throw ScenarioError(2, where + ": complex entries are [re,im] pairs");
      m(i, c) = {cell[0].get<double>(), cell[1].get<double>()};
    }
  }
  return m;
}

}  // namespace detail

struct Scenario {
  std::map<std::string, ConeModelPtr<double>> models;
  std::map<std::string, Effect<double>> effects;
  std::map<std::string, State<double>> states;
  std::map<std::string, Observable<double>> observables;
  std::map<std::string, Operation<double>> operations;
  std::map<std::string, Instrument<double>> instruments;
  json checks = json::array();

  template <class T>
  const T& resolve(const std::map<std::string, T>& table, const std::string& name,
                   const char* kind) const {
    auto it = table.find(name);
    if (it == table.end())
      throw ScenarioError(2, std::string("unresolved ") + kind + " name '" + name + "'");
    return it->second;
  }

  const ConeModelPtr<double>& model(const std::string& n) const {
    return resolve(models, n, "model");
  }
  const Effect<double>& effect(const std::string& n) const {
    return resolve(effects, n, "effect");
  }
  const State<double>& state(const std::string& n) const {
    return resolve(states, n, "state");
  }
  const Observable<double>& observable(const std::string& n) const {
    return resolve(observables, n, "observable");
  }
  const Operation<double>& operation(const std::string& n) const {
    return resolve(operations, n, "operation");
  }
  const Instrument<double>& instrument(const std::string& n) const {
    return resolve(instruments, n, "instrument");
  }
};

namespace detail {

/// Invariant violations surface as exit-1 errors tagged with the object name.
template <class Fn>
auto checked(const std::string& where, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(1, where + ": " + e.what());
  }
}

inline ConeModelPtr<double> parse_model(const json& j, const std::string& where,
                                        std::optional<double> tol) {
  const std::string kind = need(j, "kind", where).get<std::string>();
  const double t = tol.value_or(1e-9);
  if (kind == "psd") {
    expect_keys(j, {"kind", "hilbert_dim", "tol"}, where);
    const double t2 = j.value("tol", tol.value_or(1e-9));
    return checked(where, [&] {
      return hilbert_model<double>(need(j, "hilbert_dim", where).get<Index>(),
                                   tol.value_or(t2));
    });
  }
  if (kind != "polyhedral")
    throw ScenarioError(2, where + ": kind must be 'polyhedral' or 'psd'");
  expect_keys(j, {"kind", "generators", "facets", "unit", "tol"}, where);
  Mat<double> gens = parse_mat(need(j, "generators", where), where).transpose();
  Mat<double> facs = parse_mat(need(j, "facets", where), where);
  Vec<double> unit = parse_vec(need(j, "unit", where), where);
  const double t2 = j.value("tol", t);
  return checked(where, [&] {
    return ConeModel<double>::polyhedral(std::move(gens), std::move(facs),
                                         std::move(unit), tol.value_or(t2));
  });
}

inline Operation<double> parse_operation(const json& j, const Scenario& sc,
                                         const std::string& where) {
  if (j.is_string()) return sc.operation(j.get<std::string>());
  if (!j.is_object()) throw ScenarioError(2, where + ": expected an object or name");
  const std::string type = j.value("type", "raw");
  if (type == "raw") {
    expect_keys(j, {"type", "source", "target", "dual_matrix"}, where);
    const auto& src = sc.model(need(j, "source", where).get<std::string>());
    const auto& tgt = sc.model(need(j, "target", where).get<std::string>());
    Mat<double> d = parse_mat(need(j, "dual_matrix", where), where);
    return checked(where, [&] { return Operation<double>(src, tgt, std::move(d)); });
  }
  if (type == "pure_holevo") {
    expect_keys(j, {"type", "effect", "state"}, where);
    const auto& a = sc.effect(need(j, "effect", where).get<std::string>());
    const auto& b = sc.state(need(j, "state", where).get<std::string>());
    return checked(where, [&] { return pure_holevo(a, b); });
  }
  if (type == "mixed_holevo") {
    expect_keys(j, {"type", "terms"}, where);
    std::vector<HolevoTerm<double>> terms;
    for (const auto& t : need(j, "terms", where)) {
      expect_keys(t, {"effect", "state"}, where + ".terms");
      terms.push_back({sc.effect(need(t, "effect", where).get<std::string>()),
                       sc.state(need(t, "state", where).get<std::string>())});
    }
    return checked(where, [&] { return mixed_holevo(terms); });
  }
  if (type == "constant") {
    expect_keys(j, {"type", "source", "state"}, where);
    const auto& src = sc.model(need(j, "source", where).get<std::string>());
    const auto& s = sc.state(need(j, "state", where).get<std::string>());
    return checked(where, [&] { return constant_channel(src, s); });
  }
  if (type == "kraus") {
    expect_keys(j, {"type", "model", "matrices"}, where);
    const auto& m = sc.model(need(j, "model", where).get<std::string>());
    std::vector<CMat<double>> ks;
    for (const auto& km : need(j, "matrices", where))
      ks.push_back(parse_cmat(km, where));
    return checked(where, [&] {
      return kraus_to_operation(KrausOperation<double>(m, std::move(ks)));
    });
  }
  throw ScenarioError(2, where + ": unknown operation type '" + type + "'");
}

inline Instrument<double> parse_instrument(const json& j, const Scenario& sc,
                                           const std::string& where) {
  if (!j.is_object()) throw ScenarioError(2, where + ": expected an object");
  const std::string type = j.value("type", "plain");
  if (type == "plain") {
    expect_keys(j, {"type", "outcomes", "operations"}, where);
    auto labels = need(j, "outcomes", where).get<std::vector<std::string>>();
    std::vector<Operation<double>> ops;
    for (const auto& o : need(j, "operations", where))
      ops.push_back(parse_operation(o, sc, where + ".operations"));
    return checked(where, [&] {
      return Instrument<double>(std::move(labels), std::move(ops));
    });
  }
  if (type == "holevo_instrument") {
    expect_keys(j, {"type", "observable", "states"}, where);
    const auto& a = sc.observable(need(j, "observable", where).get<std::string>());
    std::vector<State<double>> betas;
    for (const auto& s : need(j, "states", where))
      betas.push_back(sc.state(s.get<std::string>()));
    return checked(where, [&] { return pure_holevo_instrument(a, betas); });
  }
  if (type == "mixed_holevo_instrument") {
    expect_keys(j, {"type", "weights", "observables", "state_tables"}, where);
    auto weights = need(j, "weights", where).get<std::vector<double>>();
    std::vector<Observable<double>> obs;
    for (const auto& o : need(j, "observables", where))
      obs.push_back(sc.observable(o.get<std::string>()));
    std::vector<std::vector<State<double>>> tables;
    for (const auto& row : need(j, "state_tables", where)) {
      std::vector<State<double>> tr;
      for (const auto& s : row) tr.push_back(sc.state(s.get<std::string>()));
      tables.push_back(std::move(tr));
    }
    return checked(where, [&] {
      return mixed_holevo_instrument(weights, obs, tables);
    });
  }
  throw ScenarioError(2, where + ": unknown instrument type '" + type + "'");
}

}  // namespace detail

/// Parse a version-1 scenario document. Unknown fields are rejected; every
/// object is validated eagerly on load. tol_override replaces every model
/// tolerance when set.
inline Scenario parse_scenario(const json& doc,
                               std::optional<double> tol_override = {}) {
  using detail::checked;
  using detail::expect_keys;
  using detail::need;
  expect_keys(doc,
              {"version", "models", "effects", "states", "observables",
               "operations", "instruments", "checks"},
              "scenario");
  if (need(doc, "version", "scenario") != json("1"))
    throw ScenarioError(2, "scenario: unsupported version (expected \"1\")");

  Scenario sc;
  for (const auto& [name, j] : need(doc, "models", "scenario").items())
    sc.models.emplace(name, detail::parse_model(j, "models." + name, tol_override));

  if (doc.contains("effects"))
    for (const auto& [name, j] : doc["effects"].items()) {
      const std::string where = "effects." + name;
      expect_keys(j, {"model", "vector", "matrix"}, where);
      const auto& m = sc.model(need(j, "model", where).get<std::string>());
      if (j.contains("matrix"))
        sc.effects.emplace(name, checked(where, [&] {
          return effect_from_matrix(m, detail::parse_cmat(j["matrix"], where));
        }));
      else
        sc.effects.emplace(name, checked(where, [&] {
          return Effect<double>(m, detail::parse_vec(need(j, "vector", where), where));
        }));
    }

  if (doc.contains("states"))
    for (const auto& [name, j] : doc["states"].items()) {
      const std::string where = "states." + name;
      expect_keys(j, {"model", "covector", "density"}, where);
      const auto& m = sc.model(need(j, "model", where).get<std::string>());
      if (j.contains("density"))
        sc.states.emplace(name, checked(where, [&] {
          return born_state(m, detail::parse_cmat(j["density"], where));
        }));
      else
        sc.states.emplace(name, checked(where, [&] {
          return State<double>(
              m, detail::parse_vec(need(j, "covector", where), where).transpose());
        }));
    }

  if (doc.contains("observables"))
    for (const auto& [name, j] : doc["observables"].items()) {
      const std::string where = "observables." + name;
      expect_keys(j, {"model", "outcomes", "effects", "matrices"}, where);
      const auto& m = sc.model(need(j, "model", where).get<std::string>());
      auto labels = need(j, "outcomes", where).get<std::vector<std::string>>();
      std::vector<Effect<double>> eff;
      if (j.contains("matrices"))
        for (const auto& cm : j["matrices"])
          eff.push_back(checked(where, [&] {
            return effect_from_matrix(m, detail::parse_cmat(cm, where));
          }));
      else
        for (const auto& v : need(j, "effects", where))
          eff.push_back(checked(
              where, [&] { return Effect<double>(m, detail::parse_vec(v, where)); }));
      sc.observables.emplace(name, checked(where, [&] {
        return Observable<double>(std::move(labels), std::move(eff));
      }));
    }

  if (doc.contains("operations"))
    for (const auto& [name, j] : doc["operations"].items())
      sc.operations.emplace(name,
                            detail::parse_operation(j, sc, "operations." + name));

  if (doc.contains("instruments"))
    for (const auto& [name, j] : doc["instruments"].items())
      sc.instruments.emplace(
          name, detail::parse_instrument(j, sc, "instruments." + name));

  if (doc.contains("checks")) {
    if (!doc["checks"].is_array())
      throw ScenarioError(2, "scenario: checks must be an array");
    sc.checks = doc["checks"];
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path,
                              std::optional<double> tol_override = {}) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(2, "cannot open scenario file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ScenarioError(2, "parse error in '" + path + "': " + e.what());
  }
  return parse_scenario(doc, tol_override);
}

}  // namespace effalg

#endif  // EFFALG_SCENARIO_HPP
