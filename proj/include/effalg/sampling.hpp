#ifndef EFFALG_SAMPLING_HPP
#define EFFALG_SAMPLING_HPP

#include <random>
#include <string>
#include <vector>

#include "effalg/holevo.hpp"
#include "effalg/instrument.hpp"
#include "effalg/observable.hpp"
#include "effalg/operation.hpp"

namespace effalg {

/// Seeded samplers over a model; deterministic given the engine state.
/// Used by the property-test batteries.

template <std::floating_point Scalar>
Vec<Scalar> sample_cone_vector(const ConeModelPtr<Scalar>& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<Scalar> uni(Scalar(0), Scalar(1));
  if (m->kind() == ConeKind::Polyhedral) {
    const auto& gen = m->generators();
    Vec<Scalar> v = Vec<Scalar>::Zero(m->dim());
    for (Index j = 0; j < gen.cols(); ++j) v += uni(rng) * gen.col(j);
    return v;
  }
  std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
  const Index n = m->hilbertDim();
  CMat<Scalar> g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = {gauss(rng), gauss(rng)};
  return coords_from_hermitian(CMat<Scalar>(g * g.adjoint()));
}

template <std::floating_point Scalar>
Effect<Scalar> sample_effect(const ConeModelPtr<Scalar>& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<Scalar> uni(Scalar(0), Scalar(1));
  const Vec<Scalar> v = sample_cone_vector(m, rng);
  const Scalar mu = detail::max_scale_below(m, v, m->unit());
  return Effect<Scalar>(m, Vec<Scalar>(uni(rng) * mu * v));
}

template <std::floating_point Scalar>
State<Scalar> sample_state(const ConeModelPtr<Scalar>& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<Scalar> uni(Scalar(0), Scalar(1));
  if (m->kind() == ConeKind::Psd)
    return State<Scalar>(
        m, detail::random_density_coords<Scalar>(m->hilbertDim(), rng).transpose());
  const auto verts = state_vertices(m);
  RowVec<Scalar> w = RowVec<Scalar>::Zero(m->dim());
  Scalar total = 0;
  std::vector<Scalar> lam(verts.size());
  for (auto& l : lam) {
    l = uni(rng) + Scalar(1e-3);
    total += l;
  }
  for (size_t i = 0; i < verts.size(); ++i) w += (lam[i] / total) * verts[i].covector;
  return State<Scalar>(m, std::move(w));
}

/// A k-outcome observable: unit mixture plus a zero-sum perturbation scaled
/// to keep every effect in [0,u] (polyhedral); a normalized random POVM (psd).
template <std::floating_point Scalar>
Observable<Scalar> sample_observable(const ConeModelPtr<Scalar>& m, Index k,
                                     std::mt19937_64& rng) {
  std::vector<std::string> labels;
  for (Index x = 0; x < k; ++x) labels.push_back("x" + std::to_string(x));

  if (m->kind() == ConeKind::Psd) {
    std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
    const Index n = m->hilbertDim();
    std::vector<CMat<Scalar>> gs;
    CMat<Scalar> total = CMat<Scalar>::Zero(n, n);
    for (Index x = 0; x < k; ++x) {
      CMat<Scalar> g(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) g(i, j) = {gauss(rng), gauss(rng)};
      gs.push_back(g * g.adjoint());
      total += gs.back();
    }
    Eigen::SelfAdjointEigenSolver<CMat<Scalar>> es(total);
    CMat<Scalar> inv_root =
        es.eigenvectors() *
        es.eigenvalues().cwiseSqrt().cwiseInverse().template cast<std::complex<Scalar>>().asDiagonal() *
        es.eigenvectors().adjoint();
    std::vector<Effect<Scalar>> eff;
    for (Index x = 0; x < k; ++x)
      eff.emplace_back(
          m, coords_from_hermitian(
                 CMat<Scalar>(inv_root * gs[static_cast<size_t>(x)] * inv_root)));
    return Observable<Scalar>(std::move(labels), std::move(eff));
  }

  std::uniform_real_distribution<Scalar> uni(Scalar(0), Scalar(1));
  std::vector<Scalar> w(static_cast<size_t>(k));
  Scalar total = 0;
  for (auto& v : w) {
    v = uni(rng) + Scalar(0.05);
    total += v;
  }
  for (auto& v : w) v /= total;

  std::vector<Vec<Scalar>> dirs;
  Vec<Scalar> sum_dirs = Vec<Scalar>::Zero(m->dim());
  for (Index x = 0; x < k; ++x) {
    dirs.push_back(sample_cone_vector(m, rng));
    sum_dirs += dirs.back();
  }
  for (Index x = 0; x < k; ++x)
    dirs[static_cast<size_t>(x)] -= w[static_cast<size_t>(x)] * sum_dirs;

  auto feasible = [&](Scalar t) {
    for (Index x = 0; x < k; ++x) {
      const Vec<Scalar> a =
          w[static_cast<size_t>(x)] * m->unit() + t * dirs[static_cast<size_t>(x)];
      if (!m->contains(a) || !m->contains(m->unit() - a)) return false;
    }
    return true;
  };
  Scalar lo = 0, hi = 4;
  if (feasible(hi)) {
    lo = hi;
  } else {
    for (int it = 0; it < 50; ++it) {
      const Scalar mid = (lo + hi) / 2;
      (feasible(mid) ? lo : hi) = mid;
    }
  }
  const Scalar t = Scalar(0.8) * lo;
  std::vector<Effect<Scalar>> eff;
  for (Index x = 0; x < k; ++x)
    eff.emplace_back(m, Vec<Scalar>(w[static_cast<size_t>(x)] * m->unit() +
                                    t * dirs[static_cast<size_t>(x)]));
  return Observable<Scalar>(std::move(labels), std::move(eff));
}

/// A random positive subunital map built from rank-one pieces a_k w_k with
/// a_k in the source cone and w_k in the dual of the target cone, scaled so
/// the dual image of the unit stays below the source unit.
template <std::floating_point Scalar>
Operation<Scalar> sample_operation(const ConeModelPtr<Scalar>& source,
                                   const ConeModelPtr<Scalar>& target,
                                   std::mt19937_64& rng) {
  std::uniform_real_distribution<Scalar> uni(Scalar(0), Scalar(1));
  std::uniform_int_distribution<int> terms(1, 3);
  Mat<Scalar> dual = Mat<Scalar>::Zero(source->dim(), target->dim());
  const int n = terms(rng);
  for (int t = 0; t < n; ++t) {
    const Vec<Scalar> a = sample_cone_vector(source, rng);
    RowVec<Scalar> w;
    if (target->kind() == ConeKind::Polyhedral) {
      const auto& fac = target->facets();
      w = RowVec<Scalar>::Zero(target->dim());
      for (Index f = 0; f < fac.rows(); ++f) w += uni(rng) * fac.row(f);
    } else {
      w = sample_cone_vector(target, rng).transpose();  // psd is self-dual
    }
    dual += a * w;
  }
  const Vec<Scalar> img = dual * target->unit();
  const Scalar mu = detail::max_scale_below(source, img, source->unit());
  dual *= (Scalar(0.05) + Scalar(0.95) * uni(rng)) * mu;
  return Operation<Scalar>(source, target, std::move(dual));
}

/// A random channel: the summed operation of a pure Holevo instrument over a
/// sampled observable and sampled preparation states.
template <std::floating_point Scalar>
Operation<Scalar> sample_channel(const ConeModelPtr<Scalar>& source,
                                 const ConeModelPtr<Scalar>& target, Index k,
                                 std::mt19937_64& rng) {
  const auto obs = sample_observable(source, k, rng);
  std::vector<State<Scalar>> betas;
  for (Index x = 0; x < k; ++x) betas.push_back(sample_state(target, rng));
  const auto ins = pure_holevo_instrument(obs, betas);
  return ovm(ins, ins.outcomes);
}

}  // namespace effalg

#endif  // EFFALG_SAMPLING_HPP
