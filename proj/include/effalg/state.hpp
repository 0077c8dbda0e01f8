#ifndef EFFALG_STATE_HPP
#define EFFALG_STATE_HPP

#include <algorithm>
#include <vector>

#include "effalg/cone.hpp"
#include "effalg/feasibility.hpp"

namespace effalg {

/// A positive unital linear functional on V, stored as a covector.
template <std::floating_point Scalar = double>
struct State {
  ConeModelPtr<Scalar> model;
  RowVec<Scalar> covector;

  State(ConeModelPtr<Scalar> m, RowVec<Scalar> w)
      : model(std::move(m)), covector(std::move(w)) {
    if (!model) throw std::invalid_argument("State: null model");
    model->check_dim(covector.transpose());
    if (!model->dualContains(covector))
      throw std::invalid_argument("State: covector is negative somewhere on the cone");
    if (std::abs(covector.dot(model->unit()) - Scalar(1)) > model->tol())
      throw std::invalid_argument("State: covector(unit) != 1");
  }
};

/// lambda * state for lambda in [0,1]; the unnormalized post-measurement form.
template <std::floating_point Scalar = double>
struct SubState {
  ConeModelPtr<Scalar> model;
  RowVec<Scalar> covector;

  SubState(ConeModelPtr<Scalar> m, RowVec<Scalar> w)
      : model(std::move(m)), covector(std::move(w)) {
    if (!model) throw std::invalid_argument("SubState: null model");
    model->check_dim(covector.transpose());
    if (!model->dualContains(covector))
      throw std::invalid_argument("SubState: covector is negative somewhere on the cone");
    const Scalar mass = covector.dot(model->unit());
    if (mass < -model->tol() || mass > Scalar(1) + model->tol())
      throw std::invalid_argument("SubState: mass outside [0,1]");
  }

  explicit SubState(const State<Scalar>& s) : model(s.model), covector(s.covector) {}

  Scalar mass() const { return covector.dot(model->unit()); }
};

/// Either the whole state space of a model or an explicit finite set.
template <std::floating_point Scalar = double>
struct StateSet {
  bool is_full = true;
  std::vector<State<Scalar>> states;

  static StateSet full() { return StateSet{}; }
  static StateSet finite(std::vector<State<Scalar>> s) {
    StateSet set;
    set.is_full = false;
    set.states = std::move(s);
    return set;
  }
};

/// The probability that the effect occurs in the state; clamped to [0,1].
template <std::floating_point Scalar>
Scalar evaluate(const State<Scalar>& s, const Effect<Scalar>& a) {
  require_same_model(s.model.get(), a.model.get(), "evaluate");
  return std::clamp(s.covector.dot(a.vector), Scalar(0), Scalar(1));
}

template <std::floating_point Scalar>
Scalar evaluate(const SubState<Scalar>& s, const Effect<Scalar>& a) {
  require_same_model(s.model.get(), a.model.get(), "evaluate");
  return std::clamp(s.covector.dot(a.vector), Scalar(0), Scalar(1));
}

template <std::floating_point Scalar>
SubState<Scalar> mix_states(const std::vector<Scalar>& weights,
                            const std::vector<State<Scalar>>& states) {
  if (weights.size() != states.size() || states.empty())
    throw std::invalid_argument("mix_states: weights and states differ in length");
  Scalar total = 0;
  for (Scalar w : weights) {
    if (w < Scalar(0) || w > Scalar(1))
      throw std::invalid_argument("mix_states: weight outside [0,1]");
    total += w;
  }
  const auto& model = states.front().model;
  if (total > Scalar(1) + model->tol())
    throw std::invalid_argument("mix_states: weights sum above 1");
  RowVec<Scalar> w = RowVec<Scalar>::Zero(model->dim());
  for (size_t i = 0; i < states.size(); ++i) {
    require_same_model(model.get(), states[i].model.get(), "mix_states");
    w += weights[i] * states[i].covector;
  }
  return SubState<Scalar>(model, std::move(w));
}

template <std::floating_point Scalar>
State<Scalar> normalize(const SubState<Scalar>& s) {
  const Scalar mass = s.mass();
  if (mass <= s.model->tol())
    throw std::invalid_argument("normalize: substate has (near-)zero mass");
  return State<Scalar>(s.model, s.covector / mass);
}

/// Extreme points of {w : w >= 0 on K, w(u) = 1} for a polyhedral model,
/// by basic-solution enumeration over dim-1 active generator constraints.
/// Deduplicated at 1e-7 and sorted lexicographically.
template <std::floating_point Scalar>
std::vector<State<Scalar>> state_vertices(const ConeModelPtr<Scalar>& model) {
  if (model->kind() != ConeKind::Polyhedral)
    throw std::invalid_argument(
        "state_vertices: extreme states of a psd model form a continuum");
  const Index d = model->dim();
  const auto& gen = model->generators();
  const Index m = gen.cols();
  const Index k = d - 1;
  if (m < k) return {};

  std::vector<RowVec<Scalar>> found;
  std::vector<Index> idx(static_cast<size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
  const Scalar dedup = Scalar(1e-7);

  auto try_subset = [&]() {
    Mat<Scalar> sys(d, d);
    for (Index r = 0; r < k; ++r)
      sys.row(r) = gen.col(idx[static_cast<size_t>(r)]).transpose();
    sys.row(d - 1) = model->unit().transpose();
    Eigen::FullPivLU<Mat<Scalar>> lu(sys);
    if (!lu.isInvertible()) return;
    Vec<Scalar> rhs = Vec<Scalar>::Zero(d);
    rhs[d - 1] = Scalar(1);
    Vec<Scalar> w = lu.solve(rhs);
    RowVec<Scalar> cov = w.transpose();
    if ((cov * gen).minCoeff() < -model->tol()) return;
    for (const auto& f : found)
      if ((f - cov).template lpNorm<Eigen::Infinity>() <= dedup) return;
    found.push_back(std::move(cov));
  };

  // iterate over all k-subsets of the m generator columns
  while (true) {
    try_subset();
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<size_t>(i)] == m - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<size_t>(i)];
    for (Index j = i + 1; j < k; ++j)
      idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
  }

  std::sort(found.begin(), found.end(),
            [](const RowVec<Scalar>& a, const RowVec<Scalar>& b) {
              for (Index i = 0; i < a.size(); ++i)
                if (a[i] != b[i]) return a[i] < b[i];
              return false;
            });
  std::vector<State<Scalar>> out;
  out.reserve(found.size());
  for (auto& w : found) out.emplace_back(model, std::move(w));
  return out;
}

/// A finite state set is order-determining exactly when its covectors
/// positively span the dual cone; decided facet-by-facet with an LP.
template <std::floating_point Scalar>
bool is_order_determining(const StateSet<Scalar>& set,
                          const ConeModelPtr<Scalar>& model) {
  if (set.is_full) return true;
  if (set.states.empty()) return false;
  if (model->kind() == ConeKind::Psd)
    return false;  // finitely many covectors never span the psd dual cone
  const Index d = model->dim();
  const Index n = static_cast<Index>(set.states.size());
  Mat<Scalar> cols(d, n);
  for (Index j = 0; j < n; ++j) {
    require_same_model(model.get(), set.states[static_cast<size_t>(j)].model.get(),
                       "is_order_determining");
    cols.col(j) = set.states[static_cast<size_t>(j)].covector.transpose();
  }
  const auto& facets = model->facets();
  for (Index f = 0; f < facets.rows(); ++f) {
    LPProblem<Scalar> p;
    p.blocks.push_back({n, Mat<Scalar>::Identity(n, n)});
    p.eq = cols;
    p.rhs = facets.row(f).transpose();
    if (solve_feasibility(p).status != FeasStatus::Feasible) return false;
  }
  return true;
}

/// max over the full state space of s(a): a vertex maximum for polyhedral
/// models, the top eigenvalue for psd models.
template <std::floating_point Scalar>
Scalar max_over_states(const Effect<Scalar>& a) {
  if (a.model->kind() == ConeKind::Psd)
    return Eigen::SelfAdjointEigenSolver<CMat<Scalar>>(
               hermitian_from_coords(a.vector, a.model->hilbertDim()),
               Eigen::EigenvaluesOnly)
        .eigenvalues()
        .maxCoeff();
  Scalar best = 0;
  for (const auto& s : state_vertices(a.model))
    best = std::max(best, s.covector.dot(a.vector));
  return best;
}

/// The vertex (or eigen-) state attaining max_over_states.
template <std::floating_point Scalar>
State<Scalar> argmax_state(const Effect<Scalar>& a) {
  if (a.model->kind() == ConeKind::Psd) {
    Eigen::SelfAdjointEigenSolver<CMat<Scalar>> es(
        hermitian_from_coords(a.vector, a.model->hilbertDim()));
    Index top;
    es.eigenvalues().maxCoeff(&top);
    const auto v = es.eigenvectors().col(top);
    CMat<Scalar> proj = v * v.adjoint();
    return State<Scalar>(a.model, coords_from_hermitian(proj).transpose());
  }
  auto verts = state_vertices(a.model);
  if (verts.empty()) throw std::logic_error("argmax_state: no vertex states");
  size_t best = 0;
  Scalar best_val = verts[0].covector.dot(a.vector);
  for (size_t i = 1; i < verts.size(); ++i) {
    const Scalar v = verts[i].covector.dot(a.vector);
    if (v > best_val) {
      best = i;
      best_val = v;
    }
  }
  return verts[best];
}

}  // namespace effalg

#endif  // EFFALG_STATE_HPP
