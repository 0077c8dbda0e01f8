// Batch front end: load a scenario file, run one check or construction,
// print a text or json report. Exit codes: 0 the check passed (or the
// construction succeeded), 1 the check failed / a precondition or invariant
// was violated, 2 the input could not be parsed or a name did not resolve.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "effalg/scenario.hpp"

using namespace effalg;

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string fmt_vec(const Vec<double>& v) {
  std::string out = "[";
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out + "]";
}

const char* verdict_name(Decision d) {
  switch (d) {
    case Decision::Yes: return "FEASIBLE";
    case Decision::No: return "INFEASIBLE";
    default: return "UNDECIDED";
  }
}

/// Library precondition violations become exit-1 check failures.
template <class Fn>
auto run(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(1, e.what());
  }
}

struct Report {
  json doc;
  std::string text;
  int exit_code = 0;
};

void emit(const Report& r, const std::string& format) {
  if (format == "json")
    std::cout << r.doc.dump(2) << "\n";
  else
    std::cout << r.text;
}

Report cmd_validate(const Scenario& sc, const std::string& path) {
  Report r;
  r.doc["command"] = "validate";
  r.doc["file"] = path;
  r.doc["objects"] = {{"models", sc.models.size()},
                      {"effects", sc.effects.size()},
                      {"states", sc.states.size()},
                      {"observables", sc.observables.size()},
                      {"operations", sc.operations.size()},
                      {"instruments", sc.instruments.size()}};
  bool all_pass = true;
  json results = json::array();
  for (const auto& c : sc.checks) {
    const std::string type = detail::need(c, "type", "checks").get<std::string>();
    json entry = c;
    bool pass = false;
    if (type == "channel") {
      const auto& op = sc.operation(detail::need(c, "operation", "checks").get<std::string>());
      const bool got = is_channel(op);
      entry["result"] = got;
      pass = got == detail::need(c, "expect", "checks").get<bool>();
    } else if (type == "repeatable") {
      const auto& e = sc.effect(detail::need(c, "effect", "checks").get<std::string>());
      const bool got = is_effect_repeatable(e).repeatable;
      entry["result"] = got;
      pass = got == detail::need(c, "expect", "checks").get<bool>();
    } else if (type == "coexist") {
      const auto& a = sc.observable(detail::need(c, "a", "checks").get<std::string>());
      const auto& b = sc.observable(detail::need(c, "b", "checks").get<std::string>());
      auto res = run([&] { return observables_coexist(a, b); });
      std::string got = verdict_name(res.decision);
      for (auto& ch : got) ch = static_cast<char>(std::tolower(ch));
      entry["result"] = got;
      pass = got == detail::need(c, "expect", "checks").get<std::string>();
    } else {
      throw ScenarioError(2, "checks: unknown directive type '" + type + "'");
    }
    entry["pass"] = pass;
    all_pass = all_pass && pass;
    results.push_back(std::move(entry));
  }
  r.doc["checks"] = std::move(results);
  r.doc["pass"] = all_pass;
  r.exit_code = all_pass ? 0 : 1;
  r.text = "validate: " + path + "\n  objects: " +
           std::to_string(sc.models.size()) + " models, " +
           std::to_string(sc.effects.size()) + " effects, " +
           std::to_string(sc.states.size()) + " states, " +
           std::to_string(sc.observables.size()) + " observables, " +
           std::to_string(sc.operations.size()) + " operations, " +
           std::to_string(sc.instruments.size()) + " instruments\n  checks: " +
           std::to_string(sc.checks.size()) + (all_pass ? " (all pass)" : " (FAILURES)") +
           "\n  result: " + (all_pass ? "OK" : "FAIL") + "\n";
  return r;
}

Report cmd_coexist(const Scenario& sc, const std::string& a_name,
                   const std::string& b_name, const std::string& witness_out) {
  const auto& a = sc.observable(a_name);
  const auto& b = sc.observable(b_name);
  auto res = run([&] { return observables_coexist(a, b); });

  Report r;
  r.doc["command"] = "coexist";
  r.doc["a"] = a_name;
  r.doc["b"] = b_name;
  r.doc["verdict"] = verdict_name(res.decision);
  r.text = "coexist: " + a_name + " vs " + b_name + " -> " +
           verdict_name(res.decision) + "\n";
  if (res.witness) {
    r.doc["witness"] = j_bi_observable(*res.witness);
    r.doc["witness_verified"] = verify_joint_observable(a, b, *res.witness);
    if (!witness_out.empty()) {
      std::ofstream out(witness_out);
      if (!out) throw ScenarioError(2, "cannot write witness file '" + witness_out + "'");
      out << r.doc["witness"].dump(2) << "\n";
      r.text += "  witness written to " + witness_out + "\n";
    }
  }
  if (res.decision == Decision::No && res.feasibility) {
    json cert;
    cert["eq_multipliers"] = j_vec(res.feasibility->eq_multipliers);
    cert["facet_multipliers"] = j_vec(res.feasibility->facet_multipliers);
    cert["verified_exact"] =
        verify_certificate(coexistence_lp(a, b), *res.feasibility);
    r.doc["certificate"] = std::move(cert);
    r.text += "  separating dual vector: " +
              fmt_vec(res.feasibility->eq_multipliers) + "\n  exact rational check: " +
              (r.doc["certificate"]["verified_exact"].get<bool>() ? "ok" : "FAILED") +
              "\n";
  }
  r.exit_code = res.decision == Decision::Yes ? 0 : 1;
  return r;
}

Report cmd_repeatable(const Scenario& sc, const std::string& effect_name,
                      const std::string& op_name) {
  const auto& a = sc.effect(effect_name);
  auto res = run([&] { return is_effect_repeatable(a); });

  Report r;
  r.doc["command"] = "repeatable";
  r.doc["effect"] = effect_name;
  r.doc["verdict"] = res.repeatable ? "REPEATABLE" : "NOT_REPEATABLE";
  r.text = "repeatable: " + effect_name + " -> " +
           (res.repeatable ? "REPEATABLE" : "NOT_REPEATABLE") + "\n";
  if (res.witness_state) {
    r.doc["witness_state"] = j_rowvec(res.witness_state->covector);
    r.text += "  witness state: " + fmt_vec(res.witness_state->covector.transpose()) + "\n";
  }
  if (res.witness_op) {
    r.doc["witness_operation"] = j_operation(*res.witness_op);
    r.doc["witness_repeats"] = is_repeatable_via(*res.witness_op, a);
  }
  if (!op_name.empty()) {
    const auto& op = sc.operation(op_name);
    auto cond = run([&] { return repeatability_conditions(op, a); });
    json table;
    table["fixes_effect"] = cond.fixes_effect;
    table["seq_self_is_self"] = cond.seq_self_is_self;
    table["seq_complement_vanishes"] = cond.seq_complement_vanishes;
    table["seq_orthogonal_vanishes"] = cond.seq_orthogonal_vanishes;
    table["dual_dominated"] = cond.dual_dominated;
    table["stable_mass"] = cond.stable_mass;
    table["all_agree"] = cond.all_agree();
    r.doc["conditions"] = std::move(table);
    r.doc["operation"] = op_name;
    r.text += "  conditions via " + op_name + ": fixes_effect=" +
              std::to_string(cond.fixes_effect) + " seq_self=" +
              std::to_string(cond.seq_self_is_self) + " seq_complement=" +
              std::to_string(cond.seq_complement_vanishes) + " seq_orthogonal=" +
              std::to_string(cond.seq_orthogonal_vanishes) + " dominated=" +
              std::to_string(cond.dual_dominated) + " stable_mass=" +
              std::to_string(cond.stable_mass) + " agree=" +
              std::to_string(cond.all_agree()) + "\n";
  }
  r.exit_code = res.repeatable ? 0 : 1;
  return r;
}

Report cmd_seqprod(const Scenario& sc, const std::string& obs_name,
                   const std::string& instr_name, const std::string& then_name) {
  const auto& a = sc.observable(obs_name);
  const auto& ins = sc.instrument(instr_name);
  const auto& b = sc.observable(then_name);
  auto grid = run([&] { return sequential_product_observables(a, ins, b); });
  auto [m1, m2] = marginals(grid);

  Report r;
  r.doc["command"] = "seqprod";
  r.doc["observable"] = obs_name;
  r.doc["instrument"] = instr_name;
  r.doc["then"] = then_name;
  r.doc["formula"] = "(A[I]B)_xy = Ix*(By)";
  r.doc["grid"] = j_bi_observable(grid);
  r.doc["first_marginal"] = j_observable(m1);
  r.doc["second_marginal"] = j_observable(m2);
  r.text = "seqprod: " + obs_name + "[" + instr_name + "]" + then_name +
           "   (A[I]B)_xy = Ix*(By)\n";
  for (Index x = 0; x < grid.rows(); ++x)
    for (Index y = 0; y < grid.cols(); ++y)
      r.text += "  (" + grid.outcomes1[static_cast<size_t>(x)] + "," +
                grid.outcomes2[static_cast<size_t>(y)] + "): " +
                fmt_vec(grid.cell(x, y).vector) + "\n";
  return r;
}

Report cmd_condition(const Scenario& sc, const std::string& instr_name,
                     const std::string& then_name) {
  const auto& ins = sc.instrument(instr_name);
  const auto& b = sc.observable(then_name);
  auto a = run([&] { return measured_observable(ins); });
  auto out = run([&] { return condition_observable(b, a, ins); });

  Report r;
  r.doc["command"] = "condition";
  r.doc["instrument"] = instr_name;
  r.doc["then"] = then_name;
  r.doc["formula"] = "(B|[I]A)_y = Ibar*(By)";
  r.doc["measured_observable"] = j_observable(a);
  r.doc["conditioned"] = j_observable(out);
  r.text = "condition: " + then_name + " | [" + instr_name +
           "]   (B|[I]A)_y = Ibar*(By)\n";
  for (size_t y = 0; y < out.outcomes.size(); ++y)
    r.text += "  " + out.outcomes[y] + ": " + fmt_vec(out.effects[y].vector) + "\n";
  return r;
}

Report cmd_commutant(const Scenario& sc, const std::string& state_name,
                     const std::string& a_name, const std::string& b_name) {
  const auto& alpha = sc.state(state_name);
  const auto& a = sc.effect(a_name);
  const auto& b = sc.effect(b_name);
  auto v = run([&] { return commutant(alpha, a, b); });

  Report r;
  r.doc["command"] = "commutant";
  r.doc["state"] = state_name;
  r.doc["a"] = a_name;
  r.doc["b"] = b_name;
  r.doc["formula"] = "[a,b]_alpha = alpha(b) a - alpha(a) b";
  r.doc["vector"] = j_vec(v);
  r.text = "commutant: [" + a_name + "," + b_name + "]_" + state_name + " = " +
           fmt_vec(v) + "\n";
  return r;
}

Report cmd_compose(const Scenario& sc, const std::string& i_name,
                   const std::string& j_name) {
  const auto& i = sc.instrument(i_name);
  const auto& j = sc.instrument(j_name);
  auto k = run([&] { return compose_instruments(i, j); });
  auto measured = measured_bi_observable(k);

  Report r;
  r.doc["command"] = "compose";
  r.doc["i"] = i_name;
  r.doc["j"] = j_name;
  r.doc["formula"] = "(I o J)_xy* = Ix* o Jy*";
  json cells = json::array();
  for (Index x = 0; x < k.rows(); ++x)
    for (Index y = 0; y < k.cols(); ++y)
      cells.push_back(json{{"x", k.outcomes1[static_cast<size_t>(x)]},
                           {"y", k.outcomes2[static_cast<size_t>(y)]},
                           {"dual_matrix", j_mat(k.cell(x, y).dual())}});
  r.doc["cells"] = std::move(cells);
  r.doc["measured_bi_observable"] = j_bi_observable(measured);
  r.text = "compose: " + i_name + " o " + j_name +
           "   (I o J)_xy* = Ix* o Jy*\n  grid " + std::to_string(k.rows()) +
           "x" + std::to_string(k.cols()) + " on " +
           std::to_string(k.source()->dim()) + "-dim source\n";
  for (Index x = 0; x < k.rows(); ++x)
    for (Index y = 0; y < k.cols(); ++y)
      r.text += "  measured (" + k.outcomes1[static_cast<size_t>(x)] + "," +
                k.outcomes2[static_cast<size_t>(y)] + "): " +
                fmt_vec(measured.cell(x, y).vector) + "\n";
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interval effect algebras: observables, instruments, coexistence"};
  app.require_subcommand(1);
  std::string format = "text";
  double tol_flag = -1;
  app.add_option("--format", format, "report format")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_option("--tol", tol_flag, "override every model tolerance");

  std::string file, a_name, b_name, effect_name, op_name, obs_name, instr_name,
      then_name, state_name, i_name, j_name, witness_out;

  auto* validate = app.add_subcommand("validate", "check every object invariant");
  validate->add_option("file", file)->required();

  auto* coexist = app.add_subcommand("coexist", "decide observable coexistence");
  coexist->add_option("file", file)->required();
  coexist->add_option("--a", a_name)->required();
  coexist->add_option("--b", b_name)->required();
  coexist->add_option("--witness-out", witness_out);

  auto* repeatable = app.add_subcommand("repeatable", "decide effect repeatability");
  repeatable->add_option("file", file)->required();
  repeatable->add_option("--effect", effect_name)->required();
  repeatable->add_option("--op", op_name);

  auto* seqprod = app.add_subcommand("seqprod", "sequential product of observables");
  seqprod->add_option("file", file)->required();
  seqprod->add_option("--obs", obs_name)->required();
  seqprod->add_option("--instr", instr_name)->required();
  seqprod->add_option("--then", then_name)->required();

  auto* condition = app.add_subcommand("condition", "condition an observable");
  condition->add_option("file", file)->required();
  condition->add_option("--instr", instr_name)->required();
  condition->add_option("--then", then_name)->required();

  auto* commutant_cmd = app.add_subcommand("commutant", "state-indexed commutant");
  commutant_cmd->add_option("file", file)->required();
  commutant_cmd->add_option("--state", state_name)->required();
  commutant_cmd->add_option("--a", a_name)->required();
  commutant_cmd->add_option("--b", b_name)->required();

  auto* compose_cmd = app.add_subcommand("compose", "compose two instruments");
  compose_cmd->add_option("file", file)->required();
  compose_cmd->add_option("--i", i_name)->required();
  compose_cmd->add_option("--j", j_name)->required();

  CLI11_PARSE(app, argc, argv);

  std::optional<double> tol_override;
  if (tol_flag > 0) tol_override = tol_flag;

  try {
    Scenario sc = load_scenario(file, tol_override);
    Report r;
    if (*validate)
      r = cmd_validate(sc, file);
    else if (*coexist)
      r = cmd_coexist(sc, a_name, b_name, witness_out);
    else if (*repeatable)
      r = cmd_repeatable(sc, effect_name, op_name);
    else if (*seqprod)
      r = cmd_seqprod(sc, obs_name, instr_name, then_name);
    else if (*condition)
      r = cmd_condition(sc, instr_name, then_name);
    else if (*commutant_cmd)
      r = cmd_commutant(sc, state_name, a_name, b_name);
    else
      r = cmd_compose(sc, i_name, j_name);
    emit(r, format);
    return r.exit_code;
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
