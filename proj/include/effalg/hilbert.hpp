#ifndef EFFALG_HILBERT_HPP
#define EFFALG_HILBERT_HPP

#include <vector>

#include "effalg/instrument.hpp"
#include "effalg/observable.hpp"
#include "effalg/operation.hpp"

namespace effalg {

/// The psd cone model of Hermitian n x n matrices with unit I; the concrete
/// Hilbert-space effect algebra. Real coordinate dimension is n^2.
template <std::floating_point Scalar = double>
ConeModelPtr<Scalar> hilbert_model(Index n, Scalar tol = Scalar(1e-9)) {
  if (n < 2) throw std::invalid_argument("hilbert_model: dimension must be >= 2");
  if (n > 8) throw std::invalid_argument("hilbert_model: dimension capped at 8");
  return ConeModel<Scalar>::psd(n, tol);
}

template <std::floating_point Scalar>
Effect<Scalar> effect_from_matrix(const ConeModelPtr<Scalar>& m,
                                  const CMat<Scalar>& a) {
  if (m->kind() != ConeKind::Psd)
    throw std::invalid_argument("effect_from_matrix: psd model required");
  return Effect<Scalar>(m, coords_from_hermitian(a));
}

template <std::floating_point Scalar>
CMat<Scalar> effect_matrix(const Effect<Scalar>& a) {
  return hermitian_from_coords(a.vector, a.model->hilbertDim());
}

/// Born rule: the state s(a) = tr(rho a). Under the orthonormal realification
/// the covector is just the coordinate vector of rho.
template <std::floating_point Scalar>
State<Scalar> born_state(const ConeModelPtr<Scalar>& m, const CMat<Scalar>& rho) {
  if (m->kind() != ConeKind::Psd)
    throw std::invalid_argument("born_state: psd model required");
  if (rho.rows() != m->hilbertDim() || rho.cols() != m->hilbertDim())
    throw std::invalid_argument("born_state: density matrix has wrong shape");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > Scalar(1e-9))
    throw std::invalid_argument("born_state: density matrix is not Hermitian");
  if (min_eigenvalue(CMat<Scalar>(rho)) < -m->tol())
    throw std::invalid_argument("born_state: density matrix has a negative eigenvalue");
  if (std::abs(rho.trace().real() - Scalar(1)) > m->tol())
    throw std::invalid_argument("born_state: trace != 1");
  return State<Scalar>(m, coords_from_hermitian(CMat<Scalar>(rho)).transpose());
}

/// A list of Kraus matrices K_i with sum K_i* K_i <= I; realizes the
/// operation rho |-> sum K_i rho K_i* with dual b |-> sum K_i* b K_i.
template <std::floating_point Scalar = double>
struct KrausOperation {
  ConeModelPtr<Scalar> model;
  std::vector<CMat<Scalar>> kraus;

  KrausOperation(ConeModelPtr<Scalar> m, std::vector<CMat<Scalar>> ks)
      : model(std::move(m)), kraus(std::move(ks)) {
    if (!model || model->kind() != ConeKind::Psd)
      throw std::invalid_argument("KrausOperation: psd model required");
    if (kraus.empty()) throw std::invalid_argument("KrausOperation: no Kraus matrices");
    const Index n = model->hilbertDim();
    CMat<Scalar> gram = CMat<Scalar>::Zero(n, n);
    for (const auto& k : kraus) {
      if (k.rows() != n || k.cols() != n)
        throw std::invalid_argument("KrausOperation: Kraus matrix has wrong shape");
      gram += k.adjoint() * k;
    }
    if (min_eigenvalue(CMat<Scalar>(CMat<Scalar>::Identity(n, n) - gram)) <
        -model->tol())
      throw std::invalid_argument("KrausOperation: sum K*K exceeds the identity");
  }
};

template <std::floating_point Scalar>
Operation<Scalar> kraus_to_operation(const KrausOperation<Scalar>& k) {
  const Index n = k.model->hilbertDim();
  const Index d = n * n;
  Mat<Scalar> dual(d, d);
  for (Index col = 0; col < d; ++col) {
    Vec<Scalar> basis = Vec<Scalar>::Zero(d);
    basis[col] = Scalar(1);
    const CMat<Scalar> b = hermitian_from_coords(basis, n);
    CMat<Scalar> image = CMat<Scalar>::Zero(n, n);
    for (const auto& km : k.kraus) image += km.adjoint() * b * km;
    dual.col(col) = coords_from_hermitian(image);
  }
  return Operation<Scalar>(k.model, k.model, std::move(dual));
}

/// The instrument of square-root operations rho |-> A_x^{1/2} rho A_x^{1/2}
/// for a POVM A; it measures A, and projective A makes every outcome
/// repeatable.
template <std::floating_point Scalar>
Instrument<Scalar> luders_instrument(const Observable<Scalar>& a) {
  const auto& m = a.model();
  if (m->kind() != ConeKind::Psd)
    throw std::invalid_argument("luders_instrument: psd model required");
  const Index n = m->hilbertDim();
  std::vector<Operation<Scalar>> ops;
  ops.reserve(a.effects.size());
  for (const auto& e : a.effects) {
    const CMat<Scalar> root =
        matrix_sqrt(hermitian_from_coords(e.vector, n), m->tol());
    ops.push_back(kraus_to_operation(KrausOperation<Scalar>(m, {root})));
  }
  return Instrument<Scalar>(a.outcomes, std::move(ops));
}

}  // namespace effalg

#endif  // EFFALG_HILBERT_HPP
