#ifndef EFFALG_TESTS_HELPERS_HPP
#define EFFALG_TESTS_HELPERS_HPP

#include <random>
#include <vector>

#include "effalg/hilbert.hpp"
#include "effalg/holevo.hpp"
#include "effalg/sampling.hpp"

namespace th {

using namespace effalg;

inline ConeModelPtr<double> r2() { return classical_model<double>(2); }
inline ConeModelPtr<double> r3() { return classical_model<double>(3); }
inline ConeModelPtr<double> gbit() { return gbit_model<double>(); }
inline ConeModelPtr<double> qubit() { return hilbert_model<double>(2); }

inline Vec<double> v2(double a, double b) { return Eigen::Vector2d(a, b); }
inline Vec<double> v3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }

inline Effect<double> eff(const ConeModelPtr<double>& m, std::initializer_list<double> xs) {
  Vec<double> v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return Effect<double>(m, std::move(v));
}

inline State<double> st(const ConeModelPtr<double>& m, std::initializer_list<double> xs) {
  RowVec<double> v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return State<double>(m, std::move(v));
}

// the standard incompatible binary observables on the gbit
inline Observable<double> gbit_x(const ConeModelPtr<double>& g) {
  return Observable<double>({"+", "-"}, {eff(g, {0.5, 0.5, 0}), eff(g, {0.5, -0.5, 0})});
}
inline Observable<double> gbit_y(const ConeModelPtr<double>& g) {
  return Observable<double>({"+", "-"}, {eff(g, {0.5, 0, 0.5}), eff(g, {0.5, 0, -0.5})});
}

inline CMat<double> cm2(std::complex<double> a, std::complex<double> b,
                        std::complex<double> c, std::complex<double> d) {
  CMat<double> m(2, 2);
  m << a, b, c, d;
  return m;
}

inline CMat<double> proj0() { return cm2(1, 0, 0, 0); }
inline CMat<double> proj1() { return cm2(0, 0, 0, 1); }

// Closed-form vertex oracles, independent of state_vertices.
inline std::vector<RowVec<double>> oracle_vertices(const ConeModelPtr<double>& m) {
  std::vector<RowVec<double>> out;
  if (m->dim() == 3 && m->kind() == ConeKind::Polyhedral &&
      m->generators().cols() == 4) {
    for (double s1 : {-1.0, 1.0})
      for (double s2 : {-1.0, 1.0}) {
        RowVec<double> w(3);
        w << 1, s1, s2;
        out.push_back(w);
      }
    return out;
  }
  for (Index i = 0; i < m->dim(); ++i) {
    RowVec<double> w = RowVec<double>::Zero(m->dim());
    w[i] = 1;
    out.push_back(w);
  }
  return out;
}

inline double oracle_max_over_states(const Effect<double>& a) {
  if (a.model->kind() == ConeKind::Psd)
    return Eigen::SelfAdjointEigenSolver<CMat<double>>(
               hermitian_from_coords(a.vector, a.model->hilbertDim()),
               Eigen::EigenvaluesOnly)
        .eigenvalues()
        .maxCoeff();
  double best = 0;
  for (const auto& w : oracle_vertices(a.model)) best = std::max(best, w.dot(a.vector));
  return best;
}

template <class Derived>
double linf(const Eigen::MatrixBase<Derived>& m) {
  return m.derived().cwiseAbs().maxCoeff();
}

}  // namespace th

#endif
