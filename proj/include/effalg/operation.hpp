#ifndef EFFALG_OPERATION_HPP
#define EFFALG_OPERATION_HPP

#include <optional>
#include <random>

#include "effalg/cone.hpp"
#include "effalg/state.hpp"

namespace effalg {

namespace detail {

template <std::floating_point Scalar>
Vec<Scalar> random_pure_coords(Index n, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> psi(n);
  for (Index i = 0; i < n; ++i) psi[i] = {gauss(rng), gauss(rng)};
  psi.normalize();
  CMat<Scalar> proj = psi * psi.adjoint();
  return coords_from_hermitian(proj);
}

template <std::floating_point Scalar>
Vec<Scalar> random_density_coords(Index n, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
  CMat<Scalar> g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = {gauss(rng), gauss(rng)};
  CMat<Scalar> rho = g * g.adjoint();
  rho /= rho.trace().real();
  return coords_from_hermitian(rho);
}

template <std::floating_point Scalar>
Vec<Scalar> random_effect_coords_psd(Index n, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
  CMat<Scalar> g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = {gauss(rng), gauss(rng)};
  CMat<Scalar> h = (g + g.adjoint()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<CMat<Scalar>> es(h);
  const Scalar lo = es.eigenvalues().minCoeff();
  const Scalar hi = es.eigenvalues().maxCoeff();
  if (hi - lo < Scalar(1e-12)) return Vec<Scalar>::Zero(n * n);
  CMat<Scalar> a = (h - lo * CMat<Scalar>::Identity(n, n)) / (hi - lo);
  return coords_from_hermitian(a);
}

/// Largest mu with mu * x <= cap (both in K); exact facet ratios for
/// polyhedral cones, bisection for psd.
template <std::floating_point Scalar>
Scalar max_scale_below(const ConeModelPtr<Scalar>& m, const Vec<Scalar>& x,
                       const Vec<Scalar>& cap) {
  if (m->kind() == ConeKind::Polyhedral) {
    const Vec<Scalar> fx = m->facets() * x;
    const Vec<Scalar> fc = m->facets() * cap;
    Scalar mu = std::numeric_limits<Scalar>::infinity();
    for (Index i = 0; i < fx.size(); ++i)
      if (fx[i] > m->tol()) mu = std::min(mu, std::max(Scalar(0), fc[i]) / fx[i]);
    return std::isfinite(mu) ? mu : Scalar(0);
  }
  Scalar lo = 0, hi = 1;
  if (!m->contains(cap - hi * x)) {
    for (int it = 0; it < 60; ++it) {
      const Scalar mid = (lo + hi) / 2;
      (m->contains(cap - mid * x) ? lo : hi) = mid;
    }
    return lo;
  }
  return hi;
}

/// Effects probing the cone directions: scaled generators for polyhedral
/// models, a fixed seeded batch for psd. Always includes the unit.
template <std::floating_point Scalar>
std::vector<Effect<Scalar>> probe_effects(const ConeModelPtr<Scalar>& m) {
  std::vector<Effect<Scalar>> out;
  if (m->kind() == ConeKind::Polyhedral) {
    const auto& gen = m->generators();
    for (Index j = 0; j < gen.cols(); ++j) {
      const Vec<Scalar> g = gen.col(j);
      const Scalar mu = max_scale_below(m, g, m->unit());
      if (mu > Scalar(0))
        out.emplace_back(m, Vec<Scalar>(mu * (Scalar(1) - Scalar(1e-12)) * g));
    }
  } else {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    const Index n = m->hilbertDim();
    for (int k = 0; k < 50; ++k)
      out.emplace_back(m, random_effect_coords_psd<Scalar>(n, rng));
  }
  out.push_back(unit_effect(m));
  return out;
}

/// Vertex states for polyhedral models; 50 seeded random densities for psd.
template <std::floating_point Scalar>
std::vector<State<Scalar>> probe_states(const ConeModelPtr<Scalar>& m) {
  if (m->kind() == ConeKind::Polyhedral) return state_vertices(m);
  std::vector<State<Scalar>> out;
  std::mt19937_64 rng(0xc2b2ae3d27d4eb4full);
  const Index n = m->hilbertDim();
  for (int k = 0; k < 50; ++k)
    out.emplace_back(m, random_density_coords<Scalar>(n, rng).transpose());
  return out;
}

}  // namespace detail

/// An operation from E1 to E2, represented canonically by the dual linear
/// map D : V2 -> V1 with D[0,u2] inside [0,u1]. The forward action on
/// states is s |-> s D. Construction validates positivity on the target
/// generators (polyhedral) or on 100 seeded pure states (psd target),
/// plus subunitality D u2 <= u1.
template <std::floating_point Scalar = double>
class Operation {
 public:
  Operation(ConeModelPtr<Scalar> source, ConeModelPtr<Scalar> target,
            Mat<Scalar> dual)
      : source_(std::move(source)), target_(std::move(target)), dual_(std::move(dual)) {
    if (!source_ || !target_) throw std::invalid_argument("Operation: null model");
    if (dual_.rows() != source_->dim() || dual_.cols() != target_->dim())
      throw std::invalid_argument("Operation: dual matrix has wrong shape");
    validate();
  }

  const ConeModelPtr<Scalar>& source() const { return source_; }
  const ConeModelPtr<Scalar>& target() const { return target_; }
  const Mat<Scalar>& dual() const { return dual_; }

 private:
  void validate() const {
    if (target_->kind() == ConeKind::Polyhedral) {
      const auto& gen = target_->generators();
      for (Index j = 0; j < gen.cols(); ++j)
        if (!source_->contains(dual_ * gen.col(j)))
          throw std::invalid_argument(
              "Operation: dual map sends a target generator outside the source cone");
    } else {
      std::mt19937_64 rng(0xa0761d6478bd642full);
      const Index n = target_->hilbertDim();
      for (int k = 0; k < 100; ++k)
        if (!source_->contains(dual_ * detail::random_pure_coords<Scalar>(n, rng)))
          throw std::invalid_argument(
              "Operation: dual map is not positive on sampled psd states");
    }
    if (!source_->contains(source_->unit() - dual_ * target_->unit()))
      throw std::invalid_argument("Operation: dual image of the unit exceeds the source unit");
  }

  ConeModelPtr<Scalar> source_;
  ConeModelPtr<Scalar> target_;
  Mat<Scalar> dual_;
};

template <std::floating_point Scalar>
SubState<Scalar> apply(const Operation<Scalar>& op, const State<Scalar>& s) {
  require_same_model(op.source().get(), s.model.get(), "apply");
  return SubState<Scalar>(op.target(), s.covector * op.dual());
}

template <std::floating_point Scalar>
SubState<Scalar> apply(const Operation<Scalar>& op, const SubState<Scalar>& s) {
  require_same_model(op.source().get(), s.model.get(), "apply");
  return SubState<Scalar>(op.target(), s.covector * op.dual());
}

/// I*(b); the unique effect with s(I*(b)) = I(s)(b) for all states s.
template <std::floating_point Scalar>
Effect<Scalar> dual_apply(const Operation<Scalar>& op, const Effect<Scalar>& b) {
  require_same_model(op.target().get(), b.model.get(), "dual_apply");
  try {
    return Effect<Scalar>(op.source(), op.dual() * b.vector);
  } catch (const std::invalid_argument&) {
    throw std::runtime_error(
        "dual_apply: image left the order interval; the operation data is corrupt");
  }
}

template <std::floating_point Scalar>
bool is_channel(const Operation<Scalar>& op) {
  return (op.dual() * op.target()->unit() - op.source()->unit())
             .template lpNorm<Eigen::Infinity>() <= op.source()->tol();
}

/// The effect measured by the operation, I*(u2).
template <std::floating_point Scalar>
Effect<Scalar> measured_effect(const Operation<Scalar>& op) {
  return Effect<Scalar>(op.source(), op.dual() * op.target()->unit());
}

/// Normalized post-measurement state I(s)/s(I^). Requires s(I^) > tol.
template <std::floating_point Scalar>
State<Scalar> update_state(const Operation<Scalar>& op, const State<Scalar>& s) {
  require_same_model(op.source().get(), s.model.get(), "update_state");
  const RowVec<Scalar> w = s.covector * op.dual();
  const Scalar mass = w.dot(op.target()->unit());
  if (mass <= op.source()->tol())
    throw std::invalid_argument(
        "update_state: the measured effect almost never occurs in this state");
  return State<Scalar>(op.target(), w / mass);
}

/// a[I]b = I*(b), defined when I measures a. The measured-effect match is
/// tested at 10x the model tolerance to absorb the matrix-vector rounding.
template <std::floating_point Scalar>
Effect<Scalar> sequential_product_effects(const Effect<Scalar>& a,
                                          const Operation<Scalar>& op,
                                          const Effect<Scalar>& b) {
  require_same_model(op.source().get(), a.model.get(), "sequential_product_effects");
  const Vec<Scalar> measured = op.dual() * op.target()->unit();
  if ((measured - a.vector).template lpNorm<Eigen::Infinity>() >
      Scalar(10) * a.model->tol())
    throw std::invalid_argument(
        "sequential_product_effects: the operation does not measure this effect");
  return dual_apply(op, b);
}

/// Sequential composition; the dual composes contravariantly, D1 * D2.
template <std::floating_point Scalar>
Operation<Scalar> compose(const Operation<Scalar>& first,
                          const Operation<Scalar>& second) {
  require_same_model(first.target().get(), second.source().get(), "compose");
  return Operation<Scalar>(first.source(), second.target(),
                           first.dual() * second.dual());
}

template <std::floating_point Scalar>
Operation<Scalar> identity_operation(const ConeModelPtr<Scalar>& m) {
  return Operation<Scalar>(m, m, Mat<Scalar>::Identity(m->dim(), m->dim()));
}

template <std::floating_point Scalar>
Operation<Scalar> zero_operation(const ConeModelPtr<Scalar>& source,
                                 const ConeModelPtr<Scalar>& target) {
  return Operation<Scalar>(source, target,
                           Mat<Scalar>::Zero(source->dim(), target->dim()));
}

/// The constant channel s |-> s2; its dual is b |-> s2(b) u1.
template <std::floating_point Scalar>
Operation<Scalar> constant_channel(const ConeModelPtr<Scalar>& source,
                                   const State<Scalar>& s2) {
  return Operation<Scalar>(source, s2.model, source->unit() * s2.covector);
}

/// a is I-repeatable when I measures a and I*(a) = a.
template <std::floating_point Scalar>
bool is_repeatable_via(const Operation<Scalar>& op, const Effect<Scalar>& a) {
  require_same_model(op.source().get(), op.target().get(), "is_repeatable_via");
  require_same_model(op.source().get(), a.model.get(), "is_repeatable_via");
  const Scalar tol = a.model->tol();
  return (op.dual() * a.model->unit() - a.vector).template lpNorm<Eigen::Infinity>() <= tol &&
         (op.dual() * a.vector - a.vector).template lpNorm<Eigen::Infinity>() <= tol;
}

/// The six equivalent repeatability conditions, each evaluated numerically
/// and independently. All include the standing hypothesis that I measures a.
struct RepeatabilityConditions {
  bool fixes_effect = false;           // I*(u) = a and I*(a) = a
  bool seq_self_is_self = false;       // a[I]a = a
  bool seq_complement_vanishes = false;  // a[I]a' = 0
  bool seq_orthogonal_vanishes = false;  // a[I]b = 0 whenever a perp b
  bool dual_dominated = false;         // I*(b) <= I*(a) for all b
  bool stable_mass = false;            // I(I(s))(u) = I(s)(u) for all s, I*(u) = a

  bool all_agree() const {
    return fixes_effect == seq_self_is_self &&
           fixes_effect == seq_complement_vanishes &&
           fixes_effect == seq_orthogonal_vanishes &&
           fixes_effect == dual_dominated && fixes_effect == stable_mass;
  }
  bool all_true() const {
    return fixes_effect && seq_self_is_self && seq_complement_vanishes &&
           seq_orthogonal_vanishes && dual_dominated && stable_mass;
  }
};

template <std::floating_point Scalar>
RepeatabilityConditions repeatability_conditions(const Operation<Scalar>& op,
                                                 const Effect<Scalar>& a) {
  require_same_model(op.source().get(), op.target().get(), "repeatability_conditions");
  require_same_model(op.source().get(), a.model.get(), "repeatability_conditions");
  const auto& m = a.model;
  const Scalar tol = m->tol();
  const Mat<Scalar>& d = op.dual();
  const Vec<Scalar> u = m->unit();
  const Vec<Scalar> measured = d * u;
  const bool measures_a =
      (measured - a.vector).template lpNorm<Eigen::Infinity>() <= tol;
  const Vec<Scalar> aprime = u - a.vector;

  RepeatabilityConditions r;
  r.fixes_effect = measures_a &&
      (d * a.vector - a.vector).template lpNorm<Eigen::Infinity>() <= tol;
  r.seq_self_is_self = measures_a &&
      (d * a.vector - a.vector).template lpNorm<Eigen::Infinity>() <= tol;
  r.seq_complement_vanishes =
      measures_a && (d * aprime).template lpNorm<Eigen::Infinity>() <= tol;

  const auto probes = detail::probe_effects(m);
  bool orth = true, dom = true;
  for (const auto& e : probes) {
    // largest sub-effect of e orthogonal to a
    const Scalar mu =
        std::min(Scalar(1), detail::max_scale_below(m, e.vector, aprime));
    if (mu > Scalar(0)) {
      const Vec<Scalar> b = mu * e.vector;
      if ((d * b).template lpNorm<Eigen::Infinity>() > tol) orth = false;
    }
    if (!m->leq(d * e.vector, d * a.vector)) dom = false;
  }
  if ((d * aprime).template lpNorm<Eigen::Infinity>() > tol) orth = false;
  r.seq_orthogonal_vanishes = measures_a && orth;
  r.dual_dominated = measures_a && dom;

  bool stable = true;
  for (const auto& s : detail::probe_states(m)) {
    const RowVec<Scalar> once = s.covector * d;
    if (std::abs((once * d).dot(u) - once.dot(u)) > tol) stable = false;
  }
  r.stable_mass = measures_a && stable;
  return r;
}

/// Verdict of the existence question: is there any operation making a
/// repeatable? True exactly when a = 0 or some state gives a probability 1;
/// the witness operation is the rank-one map I(s) = s(a) s1 from that state.
template <std::floating_point Scalar = double>
struct EffectRepeatability {
  bool repeatable = false;
  std::optional<State<Scalar>> witness_state;
  std::optional<Operation<Scalar>> witness_op;
};

template <std::floating_point Scalar>
EffectRepeatability<Scalar> is_effect_repeatable(const Effect<Scalar>& a) {
  const auto& m = a.model;
  EffectRepeatability<Scalar> out;
  if (a.vector.template lpNorm<Eigen::Infinity>() <= m->tol()) {
    out.repeatable = true;
    out.witness_op = zero_operation(m, m);
    return out;
  }
  if (max_over_states(a) >= Scalar(1) - m->tol()) {
    out.repeatable = true;
    State<Scalar> s1 = argmax_state(a);
    out.witness_op = Operation<Scalar>(m, m, a.vector * s1.covector);
    out.witness_state = std::move(s1);
  }
  return out;
}

}  // namespace effalg

#endif  // EFFALG_OPERATION_HPP
