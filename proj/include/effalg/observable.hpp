#ifndef EFFALG_OBSERVABLE_HPP
#define EFFALG_OBSERVABLE_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "effalg/cone.hpp"
#include "effalg/feasibility.hpp"
#include "effalg/state.hpp"

namespace effalg {

/// A finite outcome-indexed family of effects summing to the unit.
/// Outcome labels are strings; their order is fixed at construction.
template <std::floating_point Scalar = double>
struct Observable {
  std::vector<std::string> outcomes;
  std::vector<Effect<Scalar>> effects;

  Observable(std::vector<std::string> labels, std::vector<Effect<Scalar>> eff)
      : outcomes(std::move(labels)), effects(std::move(eff)) {
    if (outcomes.empty() || outcomes.size() != effects.size())
      throw std::invalid_argument("Observable: outcomes and effects differ in length");
    std::set<std::string> seen(outcomes.begin(), outcomes.end());
    if (seen.size() != outcomes.size())
      throw std::invalid_argument("Observable: duplicate outcome label");
    const auto& m = effects.front().model;
    Vec<Scalar> sum = Vec<Scalar>::Zero(m->dim());
    for (const auto& e : effects) {
      require_same_model(m.get(), e.model.get(), "Observable");
      sum += e.vector;
    }
    if ((sum - m->unit()).template lpNorm<Eigen::Infinity>() >
        m->tol() * Scalar(outcomes.size()))
      throw std::invalid_argument("Observable: effects do not sum to the unit");
  }

  const ConeModelPtr<Scalar>& model() const { return effects.front().model; }
  Index size() const { return static_cast<Index>(outcomes.size()); }

  Index index_of(const std::string& label) const {
    for (size_t i = 0; i < outcomes.size(); ++i)
      if (outcomes[i] == label) return static_cast<Index>(i);
    throw std::invalid_argument("Observable: unknown outcome label '" + label + "'");
  }
};

template <std::floating_point Scalar>
Observable<Scalar> trivial_observable(const ConeModelPtr<Scalar>& m,
                                      std::string label = "u") {
  return Observable<Scalar>({std::move(label)}, {unit_effect(m)});
}

/// An observable on a product outcome grid, stored row-major with the first
/// coordinate outermost.
template <std::floating_point Scalar = double>
struct BiObservable {
  std::vector<std::string> outcomes1, outcomes2;
  std::vector<Effect<Scalar>> cells;

  BiObservable(std::vector<std::string> o1, std::vector<std::string> o2,
               std::vector<Effect<Scalar>> grid)
      : outcomes1(std::move(o1)), outcomes2(std::move(o2)), cells(std::move(grid)) {
    if (outcomes1.empty() || outcomes2.empty() ||
        cells.size() != outcomes1.size() * outcomes2.size())
      throw std::invalid_argument("BiObservable: grid size mismatch");
    const auto& m = cells.front().model;
    Vec<Scalar> sum = Vec<Scalar>::Zero(m->dim());
    for (const auto& e : cells) {
      require_same_model(m.get(), e.model.get(), "BiObservable");
      sum += e.vector;
    }
    if ((sum - m->unit()).template lpNorm<Eigen::Infinity>() >
        m->tol() * Scalar(cells.size()))
      throw std::invalid_argument("BiObservable: cells do not sum to the unit");
  }

  const ConeModelPtr<Scalar>& model() const { return cells.front().model; }
  Index rows() const { return static_cast<Index>(outcomes1.size()); }
  Index cols() const { return static_cast<Index>(outcomes2.size()); }
  const Effect<Scalar>& cell(Index x, Index y) const {
    return cells[static_cast<size_t>(x * cols() + y)];
  }

  /// Flatten to a plain observable with labels "x,y".
  Observable<Scalar> to_observable() const {
    std::vector<std::string> labels;
    labels.reserve(cells.size());
    for (const auto& x : outcomes1)
      for (const auto& y : outcomes2) labels.push_back(x + "," + y);
    return Observable<Scalar>(std::move(labels), cells);
  }
};

/// The effect-valued measure A(Delta) = sum of A_x over x in Delta.
template <std::floating_point Scalar>
Effect<Scalar> evm(const Observable<Scalar>& a,
                   const std::vector<std::string>& delta) {
  std::set<std::string> seen;
  Vec<Scalar> sum = Vec<Scalar>::Zero(a.model()->dim());
  for (const auto& label : delta) {
    if (!seen.insert(label).second)
      throw std::invalid_argument("evm: duplicate label '" + label + "' in subset");
    sum += a.effects[static_cast<size_t>(a.index_of(label))].vector;
  }
  return Effect<Scalar>(a.model(), std::move(sum));
}

/// The outcome distribution (s(A_x))_x; entries clamped to [0,1].
template <std::floating_point Scalar>
Vec<Scalar> distribution(const Observable<Scalar>& a, const State<Scalar>& s) {
  require_same_model(a.model().get(), s.model.get(), "distribution");
  Vec<Scalar> p(a.size());
  for (Index x = 0; x < a.size(); ++x)
    p[x] = evaluate(s, a.effects[static_cast<size_t>(x)]);
  return p;
}

template <std::floating_point Scalar>
std::pair<Observable<Scalar>, Observable<Scalar>> marginals(
    const BiObservable<Scalar>& c) {
  const auto& m = c.model();
  std::vector<Effect<Scalar>> first, second;
  for (Index x = 0; x < c.rows(); ++x) {
    Vec<Scalar> sum = Vec<Scalar>::Zero(m->dim());
    for (Index y = 0; y < c.cols(); ++y) sum += c.cell(x, y).vector;
    first.emplace_back(m, std::move(sum));
  }
  for (Index y = 0; y < c.cols(); ++y) {
    Vec<Scalar> sum = Vec<Scalar>::Zero(m->dim());
    for (Index x = 0; x < c.rows(); ++x) sum += c.cell(x, y).vector;
    second.emplace_back(m, std::move(sum));
  }
  return {Observable<Scalar>(c.outcomes1, std::move(first)),
          Observable<Scalar>(c.outcomes2, std::move(second))};
}

enum class Decision { Yes, No, Undecided };

template <std::floating_point Scalar = double>
struct ObservableCoexistence {
  Decision decision = Decision::Undecided;
  std::optional<BiObservable<Scalar>> witness;
  std::optional<FeasibilityResult<Scalar>> feasibility;
};

/// The joint-bi-observable LP: one cone block per grid cell, marginal sums
/// pinned to A and B. Exposed so certificates can be re-verified exactly.
template <std::floating_point Scalar>
LPProblem<Scalar> coexistence_lp(const Observable<Scalar>& a,
                                 const Observable<Scalar>& b) {
  const auto& m = a.model();
  const Index d = m->dim();
  const Index na = a.size(), nb = b.size();
  LPProblem<Scalar> p;
  p.blocks.assign(static_cast<size_t>(na * nb), ConeBlock<Scalar>{d, m->facets()});
  p.eq = Mat<Scalar>::Zero(d * (na + nb), na * nb * d);
  p.rhs = Vec<Scalar>(d * (na + nb));
  for (Index x = 0; x < na; ++x) {
    p.rhs.segment(x * d, d) = a.effects[static_cast<size_t>(x)].vector;
    for (Index y = 0; y < nb; ++y)
      for (Index c = 0; c < d; ++c) p.eq(x * d + c, (x * nb + y) * d + c) = 1;
  }
  for (Index y = 0; y < nb; ++y) {
    p.rhs.segment((na + y) * d, d) = b.effects[static_cast<size_t>(y)].vector;
    for (Index x = 0; x < na; ++x)
      for (Index c = 0; c < d; ++c)
        p.eq((na + y) * d + c, (x * nb + y) * d + c) = 1;
  }
  return p;
}

/// True when c has outcome labels of a and b and reproduces both as
/// marginals to 1e-7.
template <std::floating_point Scalar>
bool verify_joint_observable(const Observable<Scalar>& a,
                             const Observable<Scalar>& b,
                             const BiObservable<Scalar>& c) {
  if (c.outcomes1 != a.outcomes || c.outcomes2 != b.outcomes) return false;
  if (c.model().get() != a.model().get()) return false;
  const auto [m1, m2] = marginals(c);
  const Scalar tol = Scalar(1e-7);
  for (Index x = 0; x < a.size(); ++x)
    if ((m1.effects[static_cast<size_t>(x)].vector -
         a.effects[static_cast<size_t>(x)].vector)
            .template lpNorm<Eigen::Infinity>() > tol)
      return false;
  for (Index y = 0; y < b.size(); ++y)
    if ((m2.effects[static_cast<size_t>(y)].vector -
         b.effects[static_cast<size_t>(y)].vector)
            .template lpNorm<Eigen::Infinity>() > tol)
      return false;
  return true;
}

namespace detail {

template <std::floating_point Scalar>
bool observables_equal(const Observable<Scalar>& a, const Observable<Scalar>& b) {
  if (a.outcomes != b.outcomes) return false;
  for (size_t i = 0; i < a.effects.size(); ++i)
    if ((a.effects[i].vector - b.effects[i].vector)
            .template lpNorm<Eigen::Infinity>() > a.model()->tol())
      return false;
  return true;
}

template <std::floating_point Scalar>
std::optional<BiObservable<Scalar>> commuting_product_candidate(
    const Observable<Scalar>& a, const Observable<Scalar>& b) {
  const auto& m = a.model();
  const Index n = m->hilbertDim();
  std::vector<Effect<Scalar>> cells;
  for (Index x = 0; x < a.size(); ++x) {
    const CMat<Scalar> ax =
        hermitian_from_coords(a.effects[static_cast<size_t>(x)].vector, n);
    const CMat<Scalar> rx = matrix_sqrt(ax, m->tol());
    for (Index y = 0; y < b.size(); ++y) {
      const CMat<Scalar> by =
          hermitian_from_coords(b.effects[static_cast<size_t>(y)].vector, n);
      CMat<Scalar> cell = rx * by * rx;
      cells.emplace_back(m, coords_from_hermitian(cell));
    }
  }
  BiObservable<Scalar> c(a.outcomes, b.outcomes, std::move(cells));
  if (!verify_joint_observable(a, b, c)) return std::nullopt;
  return c;
}

}  // namespace detail

/// Decide whether A and B are the marginals of one bi-observable.
/// Polyhedral models: complete LP decision with witness or Farkas
/// certificate. Psd models: verifies the supplied candidate, or tries the
/// product candidate sqrt(A_x) B_y sqrt(A_x); otherwise Undecided.
template <std::floating_point Scalar>
ObservableCoexistence<Scalar> observables_coexist(
    const Observable<Scalar>& a, const Observable<Scalar>& b,
    const BiObservable<Scalar>* candidate = nullptr) {
  require_same_model(a.model().get(), b.model().get(), "observables_coexist");
  ObservableCoexistence<Scalar> out;

  if (candidate) {
    out.decision = verify_joint_observable(a, b, *candidate) ? Decision::Yes
                                                             : Decision::Undecided;
    if (out.decision == Decision::Yes) out.witness = *candidate;
    return out;
  }

  if (detail::observables_equal(a, b)) {
    std::vector<Effect<Scalar>> cells;
    for (Index x = 0; x < a.size(); ++x)
      for (Index y = 0; y < a.size(); ++y)
        cells.push_back(x == y ? a.effects[static_cast<size_t>(x)]
                               : zero_effect(a.model()));
    out.decision = Decision::Yes;
    out.witness = BiObservable<Scalar>(a.outcomes, b.outcomes, std::move(cells));
    return out;
  }

  if (a.model()->kind() == ConeKind::Psd) {
    if (auto c = detail::commuting_product_candidate(a, b)) {
      out.decision = Decision::Yes;
      out.witness = std::move(*c);
    }
    return out;
  }

  const auto lp = coexistence_lp(a, b);
  auto res = solve_feasibility(lp);
  if (res.status == FeasStatus::Feasible) {
    const Index d = a.model()->dim();
    std::vector<Effect<Scalar>> cells;
    for (Index i = 0; i < a.size() * b.size(); ++i)
      cells.emplace_back(a.model(), Vec<Scalar>(res.point.segment(i * d, d)));
    out.decision = Decision::Yes;
    out.witness = BiObservable<Scalar>(a.outcomes, b.outcomes, std::move(cells));
    if (!verify_joint_observable(a, b, *out.witness))
      throw std::runtime_error("observables_coexist: solver witness failed re-verification");
  } else {
    out.decision = Decision::No;
  }
  out.feasibility = std::move(res);
  return out;
}

template <std::floating_point Scalar = double>
struct EffectCoexistence {
  Decision decision = Decision::Undecided;
  std::optional<Observable<Scalar>> witness;
  std::vector<Index> support_a, support_b;  // witness outcomes realizing a and b
  std::optional<FeasibilityResult<Scalar>> feasibility;
};

/// Effects coexist when one observable measures both via subsets; decided by
/// reducing to coexistence of the binary observables {a,a'} and {b,b'}.
template <std::floating_point Scalar>
EffectCoexistence<Scalar> effects_coexist(const Effect<Scalar>& a,
                                          const Effect<Scalar>& b) {
  require_same_model(a.model.get(), b.model.get(), "effects_coexist");
  const auto& m = a.model;
  EffectCoexistence<Scalar> out;

  if (effect_perp(a, b)) {
    // a, b, (a+b)' is already a joint observable; drop the rest cell if zero
    std::vector<std::string> labels = {"a", "b"};
    std::vector<Effect<Scalar>> eff = {a, b};
    const Vec<Scalar> rest = m->unit() - a.vector - b.vector;
    if (rest.template lpNorm<Eigen::Infinity>() > m->tol()) {
      labels.push_back("rest");
      eff.emplace_back(m, rest);
    }
    out.decision = Decision::Yes;
    out.witness = Observable<Scalar>(std::move(labels), std::move(eff));
    out.support_a = {0};
    out.support_b = {1};
    return out;
  }

  const Observable<Scalar> oa({"1", "0"}, {a, complement(a)});
  const Observable<Scalar> ob({"1", "0"}, {b, complement(b)});
  auto res = observables_coexist(oa, ob);
  out.decision = res.decision;
  out.feasibility = std::move(res.feasibility);
  if (res.decision == Decision::Yes) {
    out.witness = res.witness->to_observable();
    out.support_a = {0, 1};  // cells (1,*)
    out.support_b = {0, 2};  // cells (*,1)
  }
  return out;
}

}  // namespace effalg

#endif  // EFFALG_OBSERVABLE_HPP
