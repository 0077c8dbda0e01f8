#ifndef EFFALG_HOLEVO_HPP
#define EFFALG_HOLEVO_HPP

#include <optional>
#include <vector>

#include "effalg/instrument.hpp"
#include "effalg/operation.hpp"

namespace effalg {

/// Measure-and-prepare operation alpha |-> alpha(a) beta; the dual is the
/// rank-one map b |-> beta(b) a, so the dual matrix is a beta^T.
template <std::floating_point Scalar>
Operation<Scalar> pure_holevo(const Effect<Scalar>& a, const State<Scalar>& beta) {
  return Operation<Scalar>(a.model, beta.model, a.vector * beta.covector);
}

template <std::floating_point Scalar = double>
struct HolevoTerm {
  Effect<Scalar> effect;
  State<Scalar> state;
};

/// Sum of pure Holevo operations; requires sum of the effects <= u1.
/// Measures sum a_i and is a channel exactly when sum a_i = u1.
template <std::floating_point Scalar>
Operation<Scalar> mixed_holevo(const std::vector<HolevoTerm<Scalar>>& terms) {
  if (terms.empty()) throw std::invalid_argument("mixed_holevo: no terms");
  const auto& src = terms.front().effect.model;
  const auto& tgt = terms.front().state.model;
  Vec<Scalar> total = Vec<Scalar>::Zero(src->dim());
  Mat<Scalar> dual = Mat<Scalar>::Zero(src->dim(), tgt->dim());
  for (const auto& t : terms) {
    require_same_model(src.get(), t.effect.model.get(), "mixed_holevo");
    require_same_model(tgt.get(), t.state.model.get(), "mixed_holevo");
    total += t.effect.vector;
    dual += t.effect.vector * t.state.covector;
  }
  if (!src->leq(total, src->unit()))
    throw std::invalid_argument("mixed_holevo: effects sum above the unit");
  return Operation<Scalar>(src, tgt, std::move(dual));
}

namespace detail {

template <std::floating_point Scalar>
State<Scalar> some_state(const ConeModelPtr<Scalar>& m) {
  if (m->kind() == ConeKind::Polyhedral) {
    auto verts = state_vertices(m);
    if (verts.empty()) throw std::logic_error("some_state: no vertex states");
    return verts.front();
  }
  const Index n = m->hilbertDim();
  CMat<Scalar> mixed = CMat<Scalar>::Identity(n, n) / Scalar(n);
  return State<Scalar>(m, coords_from_hermitian(mixed).transpose());
}

}  // namespace detail

template <std::floating_point Scalar = double>
struct PureRepresentation {
  bool pure = false;
  std::optional<Effect<Scalar>> effect;
  std::optional<State<Scalar>> state;
};

/// An operation is a pure Holevo operation exactly when its dual matrix has
/// rank one; singular values below 1e-8 of the largest count as zero. The
/// factorization is normalized so the right factor is a state.
template <std::floating_point Scalar>
PureRepresentation<Scalar> is_pure_representable(const Operation<Scalar>& op) {
  PureRepresentation<Scalar> out;
  const Mat<Scalar>& d = op.dual();
  if (d.cwiseAbs().maxCoeff() <= op.source()->tol()) {
    out.pure = true;
    out.effect = zero_effect(op.source());
    out.state = detail::some_state(op.target());
    return out;
  }
  Eigen::JacobiSVD<Mat<Scalar>> svd(d, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() > 1 && sv[1] > Scalar(1e-8) * sv[0]) return out;

  // d = b beta with b = d u2 and beta = v^T / (v . u2)
  const Vec<Scalar> b = d * op.target()->unit();
  const Vec<Scalar> v = svd.matrixV().col(0);
  const Scalar t = v.dot(op.target()->unit());
  if (std::abs(t) <= op.source()->tol()) return out;
  try {
    out.state = State<Scalar>(op.target(), RowVec<Scalar>(v.transpose() / t));
    out.effect = Effect<Scalar>(op.source(), b);
    out.pure = true;
  } catch (const std::invalid_argument&) {
    out = PureRepresentation<Scalar>{};
  }
  return out;
}

/// The state-indexed product a[beta]b = beta(b) a.
template <std::floating_point Scalar>
Effect<Scalar> holevo_seq_effects(const Effect<Scalar>& a, const State<Scalar>& beta,
                                  const Effect<Scalar>& b) {
  require_same_model(beta.model.get(), b.model.get(), "holevo_seq_effects");
  return Effect<Scalar>(a.model, beta.covector.dot(b.vector) * a.vector);
}

/// The instrument {H^(A_x, beta_x)}; measures A for every choice of states.
template <std::floating_point Scalar>
Instrument<Scalar> pure_holevo_instrument(const Observable<Scalar>& a,
                                          const std::vector<State<Scalar>>& betas) {
  if (betas.size() != a.effects.size())
    throw std::invalid_argument("pure_holevo_instrument: one state per outcome required");
  std::vector<Operation<Scalar>> ops;
  ops.reserve(betas.size());
  for (size_t x = 0; x < betas.size(); ++x)
    ops.push_back(pure_holevo(a.effects[x], betas[x]));
  return Instrument<Scalar>(a.outcomes, std::move(ops));
}

/// I_x = sum_i lambda_i H^(A_ix, beta_ix) for observables A_i on a shared
/// outcome set and convex weights lambda.
template <std::floating_point Scalar>
Instrument<Scalar> mixed_holevo_instrument(
    const std::vector<Scalar>& weights,
    const std::vector<Observable<Scalar>>& observables,
    const std::vector<std::vector<State<Scalar>>>& state_tables) {
  const size_t n = weights.size();
  if (n == 0 || observables.size() != n || state_tables.size() != n)
    throw std::invalid_argument("mixed_holevo_instrument: table sizes differ");
  Scalar total = 0;
  for (Scalar w : weights) {
    if (w < Scalar(0) || w > Scalar(1))
      throw std::invalid_argument("mixed_holevo_instrument: weight outside [0,1]");
    total += w;
  }
  const auto& a0 = observables.front();
  if (std::abs(total - Scalar(1)) > a0.model()->tol() * Scalar(n))
    throw std::invalid_argument("mixed_holevo_instrument: weights must sum to 1");
  const auto& tgt = state_tables.front().front().model;
  for (size_t i = 0; i < n; ++i) {
    if (observables[i].outcomes != a0.outcomes)
      throw std::invalid_argument(
          "mixed_holevo_instrument: observables must share one outcome set");
    if (state_tables[i].size() != a0.outcomes.size())
      throw std::invalid_argument("mixed_holevo_instrument: state table shape mismatch");
  }
  std::vector<Operation<Scalar>> ops;
  for (size_t x = 0; x < a0.outcomes.size(); ++x) {
    Mat<Scalar> dual = Mat<Scalar>::Zero(a0.model()->dim(), tgt->dim());
    for (size_t i = 0; i < n; ++i)
      dual += weights[i] * observables[i].effects[x].vector *
              state_tables[i][x].covector;
    ops.emplace_back(a0.model(), tgt, std::move(dual));
  }
  return Instrument<Scalar>(a0.outcomes, std::move(ops));
}

/// The Holevo sequential product of two observables on one model:
/// (A o B)_{xy} = beta_x(B_y) A_x.
template <std::floating_point Scalar>
BiObservable<Scalar> holevo_seq_observables(const Observable<Scalar>& a,
                                            const std::vector<State<Scalar>>& betas,
                                            const Observable<Scalar>& b) {
  require_same_model(a.model().get(), b.model().get(), "holevo_seq_observables");
  if (betas.size() != a.effects.size())
    throw std::invalid_argument("holevo_seq_observables: one state per outcome required");
  std::vector<Effect<Scalar>> cells;
  for (size_t x = 0; x < a.effects.size(); ++x) {
    require_same_model(a.model().get(), betas[x].model.get(),
                       "holevo_seq_observables");
    for (const auto& by : b.effects)
      cells.push_back(holevo_seq_effects(a.effects[x], betas[x], by));
  }
  return BiObservable<Scalar>(a.outcomes, b.outcomes, std::move(cells));
}

/// Composition of two pure Holevo instruments and its closed forms:
/// the composed grid equals the pure Holevo bi-instrument on the product
/// bi-observable (A o B)_{xy} = alpha_x(B_y) A_x with cell states beta_y;
/// the first marginal is H^(A, delta) with delta_x = sum_y alpha_x(B_y) beta_y
/// and the second is H^(C, beta) with C_y = sum_x alpha_x(B_y) A_x.
template <std::floating_point Scalar = double>
struct HolevoComposition {
  BiInstrument<Scalar> composed;
  BiObservable<Scalar> product;
  std::vector<State<Scalar>> first_marginal_states;
  Observable<Scalar> second_marginal_observable;
  bool composed_is_pure_grid = false;
  bool first_marginal_matches = false;
  bool second_marginal_matches = false;
};

template <std::floating_point Scalar>
HolevoComposition<Scalar> holevo_compose_identity(
    const Observable<Scalar>& a, const std::vector<State<Scalar>>& alphas,
    const Observable<Scalar>& b, const std::vector<State<Scalar>>& betas) {
  const auto hi = pure_holevo_instrument(a, alphas);
  const auto hj = pure_holevo_instrument(b, betas);
  auto composed = compose_instruments(hi, hj);
  const auto& e1 = a.model();
  const auto& e3 = betas.front().model;

  // product bi-observable on E1 with cells alpha_x(B_y) A_x
  std::vector<Effect<Scalar>> prod_cells;
  for (size_t x = 0; x < a.effects.size(); ++x)
    for (const auto& by : b.effects)
      prod_cells.push_back(holevo_seq_effects(a.effects[x], alphas[x], by));
  BiObservable<Scalar> product(a.outcomes, b.outcomes, std::move(prod_cells));

  const Scalar tol = Scalar(1e-12) * std::max(Scalar(1), Scalar(a.effects.size()));
  bool pure_grid = true;
  for (Index x = 0; x < composed.rows(); ++x)
    for (Index y = 0; y < composed.cols(); ++y) {
      const Mat<Scalar> expect = product.cell(x, y).vector *
                                 betas[static_cast<size_t>(y)].covector;
      if ((composed.cell(x, y).dual() - expect).cwiseAbs().maxCoeff() > tol)
        pure_grid = false;
    }

  // delta_x = sum_y alpha_x(B_y) beta_y
  std::vector<State<Scalar>> delta;
  for (size_t x = 0; x < a.effects.size(); ++x) {
    RowVec<Scalar> w = RowVec<Scalar>::Zero(e3->dim());
    for (size_t y = 0; y < b.effects.size(); ++y)
      w += alphas[x].covector.dot(b.effects[y].vector) * betas[y].covector;
    delta.emplace_back(e3, std::move(w));
  }
  // C_y = sum_x alpha_x(B_y) A_x
  std::vector<Effect<Scalar>> c_eff;
  for (size_t y = 0; y < b.effects.size(); ++y) {
    Vec<Scalar> v = Vec<Scalar>::Zero(e1->dim());
    for (size_t x = 0; x < a.effects.size(); ++x)
      v += alphas[x].covector.dot(b.effects[y].vector) * a.effects[x].vector;
    c_eff.emplace_back(e1, std::move(v));
  }
  Observable<Scalar> c(b.outcomes, std::move(c_eff));

  const auto [mi, mj] = marginal_instruments(composed);
  bool first_ok = true;
  for (size_t x = 0; x < a.effects.size(); ++x) {
    const Mat<Scalar> expect = a.effects[x].vector * delta[x].covector;
    if ((mi.ops[x].dual() - expect).cwiseAbs().maxCoeff() >
        tol * Scalar(b.effects.size()))
      first_ok = false;
  }
  bool second_ok = true;
  for (size_t y = 0; y < b.effects.size(); ++y) {
    const Mat<Scalar> expect = c.effects[y].vector * betas[y].covector;
    if ((mj.ops[y].dual() - expect).cwiseAbs().maxCoeff() >
        tol * Scalar(a.effects.size()))
      second_ok = false;
  }

  return HolevoComposition<Scalar>{std::move(composed),
                                   std::move(product),
                                   std::move(delta),
                                   std::move(c),
                                   pure_grid,
                                   first_ok,
                                   second_ok};
}

/// The alpha-commutant [a,b]_alpha = alpha(b) a - alpha(a) b; a plain vector
/// of V, generally outside the cone.
template <std::floating_point Scalar>
Vec<Scalar> commutant(const State<Scalar>& alpha, const Effect<Scalar>& a,
                      const Effect<Scalar>& b) {
  require_same_model(alpha.model.get(), a.model.get(), "commutant");
  require_same_model(alpha.model.get(), b.model.get(), "commutant");
  return alpha.covector.dot(b.vector) * a.vector -
         alpha.covector.dot(a.vector) * b.vector;
}

/// Lawbook for the alpha-commutant, evaluated on one input tuple.
struct CommutantLaws {
  bool seq_preserves_commuting = false;  // [a,c]=0 implies [a[alpha]b, c]=0
  bool additive = false;                 // [a+b,c] = [a,c]+[b,c] (needs a perp b)
  bool unit_commutant_detects = false;   // [a,u]=0 exactly when a = alpha(a) u
  bool theta_complement_witness = false;  // [a,0]=0 while [a,0']=[a,u]
  bool antisymmetric = false;            // [a,b] = -[b,a]
  bool scales = false;                   // [la,b] = l [a,b]
  bool alpha_annihilates = false;        // alpha([a,b]) = 0
  bool self_vanishes = false;            // [a,a] = 0

  bool all_pass() const {
    return seq_preserves_commuting && additive && unit_commutant_detects &&
           theta_complement_witness && antisymmetric && scales &&
           alpha_annihilates && self_vanishes;
  }
};

template <std::floating_point Scalar>
CommutantLaws commutant_laws(const State<Scalar>& alpha, const Effect<Scalar>& a,
                             const Effect<Scalar>& b, const Effect<Scalar>& c,
                             Scalar tol = Scalar(1e-10)) {
  if (!effect_perp(a, b))
    throw std::invalid_argument("commutant_laws: additivity needs a perp b");
  const auto& m = a.model;
  auto norm = [](const Vec<Scalar>& v) {
    return v.template lpNorm<Eigen::Infinity>();
  };
  CommutantLaws r;

  const Vec<Scalar> ac = commutant(alpha, a, c);
  if (norm(ac) <= tol) {
    const Effect<Scalar> ab = holevo_seq_effects(a, alpha, b);
    r.seq_preserves_commuting = norm(commutant(alpha, ab, c)) <= tol;
  } else {
    r.seq_preserves_commuting = true;  // premise fails, nothing to check
  }

  r.additive = norm(commutant(alpha, effect_add(a, b), c) - ac -
                    commutant(alpha, b, c)) <= tol;

  const Effect<Scalar> u = unit_effect(m);
  const Vec<Scalar> au = commutant(alpha, a, u);
  const Scalar dev = norm(a.vector - alpha.covector.dot(a.vector) * m->unit());
  r.unit_commutant_detects = (norm(au) <= tol) == (dev <= tol);

  const Effect<Scalar> theta = zero_effect(m);
  r.theta_complement_witness =
      norm(commutant(alpha, a, theta)) <= tol &&
      norm(commutant(alpha, a, complement(theta)) - au) <= tol;

  r.antisymmetric = norm(commutant(alpha, a, b) + commutant(alpha, b, a)) <= tol;

  const Scalar lambda = Scalar(0.37);
  r.scales = norm(commutant(alpha, effect_scale(lambda, a), b) -
                  lambda * commutant(alpha, a, b)) <= tol;

  r.alpha_annihilates =
      std::abs(alpha.covector.dot(commutant(alpha, a, b))) <= tol;

  r.self_vanishes = norm(commutant(alpha, a, a)) <= tol;
  return r;
}

}  // namespace effalg

#endif  // EFFALG_HOLEVO_HPP
