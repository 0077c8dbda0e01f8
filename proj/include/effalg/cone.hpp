#ifndef EFFALG_CONE_HPP
#define EFFALG_CONE_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <complex>
#include <concepts>
#include <memory>
#include <stdexcept>
#include <string>

namespace effalg {

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using CMat = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

enum class ConeKind { Polyhedral, Psd };

/// Hermitian n x n matrices carry real coordinates of length n^2 in an
/// orthonormal (trace inner product) basis: the n diagonal units E_kk,
/// then for each i<j the pair (E_ij+E_ji)/sqrt(2), (iE_ij-iE_ji)/sqrt(2).
/// Under this basis dot(coords(a), coords(b)) = tr(a b).
template <std::floating_point Scalar>
CMat<Scalar> hermitian_from_coords(const Vec<Scalar>& x, Index n) {
  if (x.size() != n * n)
    throw std::invalid_argument("hermitian_from_coords: coordinate length != n^2");
  const Scalar inv_sqrt2 = Scalar(1) / std::sqrt(Scalar(2));
  CMat<Scalar> h = CMat<Scalar>::Zero(n, n);
  for (Index k = 0; k < n; ++k) h(k, k) = x[k];
  Index off = n;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const std::complex<Scalar> v(x[off] * inv_sqrt2, x[off + 1] * inv_sqrt2);
      h(i, j) = v;
      h(j, i) = std::conj(v);
      off += 2;
    }
  return h;
}

template <std::floating_point Scalar>
Vec<Scalar> coords_from_hermitian(const CMat<Scalar>& h) {
  const Index n = h.rows();
  if (h.cols() != n) throw std::invalid_argument("coords_from_hermitian: not square");
  const Scalar sqrt2 = std::sqrt(Scalar(2));
  Vec<Scalar> x(n * n);
  for (Index k = 0; k < n; ++k) x[k] = h(k, k).real();
  Index off = n;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      x[off] = sqrt2 * h(i, j).real();
      x[off + 1] = sqrt2 * h(i, j).imag();
      off += 2;
    }
  return x;
}

template <std::floating_point Scalar>
Scalar min_eigenvalue(const CMat<Scalar>& h) {
  Eigen::SelfAdjointEigenSolver<CMat<Scalar>> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Principal square root of a Hermitian psd matrix. Eigenvalues in
/// [-clamp_tol, 0) are treated as 0; anything lower is an error.
template <std::floating_point Scalar>
CMat<Scalar> matrix_sqrt(const CMat<Scalar>& a, Scalar clamp_tol = Scalar(1e-9)) {
  if (a.rows() != a.cols() ||
      (a - a.adjoint()).cwiseAbs().maxCoeff() > Scalar(1e-9))
    throw std::invalid_argument("matrix_sqrt: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMat<Scalar>> es(a);
  Vec<Scalar> ev = es.eigenvalues();
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -clamp_tol)
      throw std::invalid_argument("matrix_sqrt: input has a negative eigenvalue");
    ev[i] = std::sqrt(std::max(ev[i], Scalar(0)));
  }
  return es.eigenvectors() * ev.template cast<std::complex<Scalar>>().asDiagonal() *
         es.eigenvectors().adjoint();
}

/// A finite-dimensional ordered linear space (V, K) with order unit u.
/// Polyhedral cones keep both representations: generators (columns) for
/// positivity-of-maps checks, facets (rows) for membership. The Psd kind is
/// the cone of positive semidefinite Hermitian matrices in real coordinates.
/// Immutable after construction; share via ConeModelPtr.
template <std::floating_point Scalar = double>
class ConeModel {
 public:
  using Ptr = std::shared_ptr<const ConeModel<Scalar>>;

  static Ptr polyhedral(Mat<Scalar> generators, Mat<Scalar> facets,
                        Vec<Scalar> unit, Scalar tol = Scalar(1e-9)) {
    return Ptr(new ConeModel(std::move(generators), std::move(facets),
                             std::move(unit), tol));
  }

  static Ptr psd(Index hilbert_dim, Scalar tol = Scalar(1e-9)) {
    return Ptr(new ConeModel(hilbert_dim, tol));
  }

  Index dim() const { return dim_; }
  ConeKind kind() const { return kind_; }
  Scalar tol() const { return tol_; }
  const Vec<Scalar>& unit() const { return unit_; }

  const Mat<Scalar>& generators() const {
    require_polyhedral("generators");
    return generators_;
  }
  const Mat<Scalar>& facets() const {
    require_polyhedral("facets");
    return facets_;
  }
  Index hilbertDim() const {
    if (kind_ != ConeKind::Psd)
      throw std::logic_error("hilbertDim: polyhedral model");
    return hilbert_dim_;
  }

  /// Smallest facet value (polyhedral) or smallest eigenvalue (psd); x is in
  /// K exactly when this is >= -tol.
  Scalar margin(const Vec<Scalar>& x) const {
    check_dim(x);
    if (kind_ == ConeKind::Polyhedral) {
      if (facets_.rows() == 0) return Scalar(0);
      return (facets_ * x).minCoeff();
    }
    return min_eigenvalue(hermitian_from_coords(x, hilbert_dim_));
  }

  bool contains(const Vec<Scalar>& x) const { return margin(x) >= -tol_; }

  /// Membership of a covector in the dual cone K* = {w : w.x >= 0 on K}.
  /// The psd cone is self-dual under the trace inner product.
  bool dualContains(const RowVec<Scalar>& w) const {
    check_dim(w.transpose());
    if (kind_ == ConeKind::Polyhedral)
      return generators_.cols() == 0 ||
             (w * generators_).minCoeff() >= -tol_;
    return contains(w.transpose());
  }

  bool leq(const Vec<Scalar>& x, const Vec<Scalar>& y) const {
    return contains(y - x);
  }

  void check_dim(const Vec<Scalar>& x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("ConeModel: vector has length " +
                                  std::to_string(x.size()) + ", expected " +
                                  std::to_string(dim_));
  }

 private:
  ConeModel(Mat<Scalar> gen, Mat<Scalar> fac, Vec<Scalar> unit, Scalar tol)
      : kind_(ConeKind::Polyhedral),
        dim_(unit.size()),
        generators_(std::move(gen)),
        facets_(std::move(fac)),
        unit_(std::move(unit)),
        tol_(tol) {
    if (dim_ <= 0) throw std::invalid_argument("ConeModel: empty unit");
    if (tol_ < Scalar(0)) throw std::invalid_argument("ConeModel: negative tol");
    if (generators_.rows() != dim_ || facets_.cols() != dim_)
      throw std::invalid_argument("ConeModel: generator/facet dimension mismatch");
    if (generators_.cols() == 0 || facets_.rows() == 0)
      throw std::invalid_argument("ConeModel: need at least one generator and facet");
    validate_polyhedral();
  }

  ConeModel(Index n, Scalar tol)
      : kind_(ConeKind::Psd), dim_(n * n), hilbert_dim_(n), tol_(tol) {
    if (n < 1) throw std::invalid_argument("ConeModel: hilbert_dim < 1");
    unit_ = Vec<Scalar>::Zero(dim_);
    unit_.head(n).setOnes();  // coords of the identity operator
  }

  void validate_polyhedral() const {
    // unit in K, unit != 0
    if ((facets_ * unit_).minCoeff() < -tol_)
      throw std::invalid_argument("ConeModel: unit is not in the cone");
    if (unit_.template lpNorm<Eigen::Infinity>() <= tol_)
      throw std::invalid_argument("ConeModel: unit is the zero vector");

    // every generator satisfies every facet inequality
    if ((facets_ * generators_).minCoeff() < -tol_)
      throw std::invalid_argument(
          "ConeModel: a generator violates a facet inequality");

    // pointed: K cap -K = {0} iff the facet normals have full rank
    Eigen::ColPivHouseholderQR<Mat<Scalar>> fqr(facets_);
    if (fqr.rank() != dim_)
      throw std::invalid_argument("ConeModel: cone is not pointed (facet rank deficient)");

    // generating: the generators span V
    Eigen::ColPivHouseholderQR<Mat<Scalar>> gqr(generators_);
    if (gqr.rank() != dim_)
      throw std::invalid_argument("ConeModel: generators do not span the space");

    // representation cross-check: each facet is tight on >= dim-1
    // linearly independent generators
    const Mat<Scalar> vals = facets_ * generators_;
    for (Index f = 0; f < facets_.rows(); ++f) {
      std::vector<Index> tight;
      for (Index g = 0; g < generators_.cols(); ++g)
        if (std::abs(vals(f, g)) <= Scalar(100) * tol_) tight.push_back(g);
      Mat<Scalar> sub(dim_, static_cast<Index>(tight.size()));
      for (Index k = 0; k < sub.cols(); ++k)
        sub.col(k) = generators_.col(tight[static_cast<size_t>(k)]);
      Eigen::ColPivHouseholderQR<Mat<Scalar>> sqr(sub);
      if (sub.cols() == 0 || sqr.rank() < dim_ - 1)
        throw std::invalid_argument(
            "ConeModel: facet " + std::to_string(f) +
            " is not tight on dim-1 independent generators; "
            "generator and facet data describe different cones");
    }

    // order unit: for every generator g some positive multiple fits under u,
    // i.e. every facet with f.g > 0 has f.u > 0
    const Vec<Scalar> fu = facets_ * unit_;
    for (Index g = 0; g < generators_.cols(); ++g)
      for (Index f = 0; f < facets_.rows(); ++f)
        if (vals(f, g) > tol_ && fu[f] <= tol_)
          throw std::invalid_argument(
              "ConeModel: unit is not an order unit (generator " +
              std::to_string(g) + " escapes facet " + std::to_string(f) + ")");
  }

  void require_polyhedral(const char* what) const {
    if (kind_ != ConeKind::Polyhedral)
      throw std::logic_error(std::string(what) + ": psd cones have no finite " + what);
  }

  ConeKind kind_;
  Index dim_ = 0;
  Index hilbert_dim_ = 0;
  Mat<Scalar> generators_;  // columns
  Mat<Scalar> facets_;      // rows
  Vec<Scalar> unit_;
  Scalar tol_ = Scalar(1e-9);
};

template <std::floating_point Scalar = double>
using ConeModelPtr = std::shared_ptr<const ConeModel<Scalar>>;

/// The simplex cone R^n_+ with unit (1,...,1); dim-n classical system.
template <std::floating_point Scalar = double>
ConeModelPtr<Scalar> classical_model(Index n, Scalar tol = Scalar(1e-9)) {
  Mat<Scalar> id = Mat<Scalar>::Identity(n, n);
  return ConeModel<Scalar>::polyhedral(id, id, Vec<Scalar>::Ones(n), tol);
}

/// The square-state-space model: V = R^3, K = {a0 >= |a1| + |a2|},
/// unit (1,0,0). Its binary X/Y observables are the standard example of
/// incompatible observables on a polyhedral cone.
template <std::floating_point Scalar = double>
ConeModelPtr<Scalar> gbit_model(Scalar tol = Scalar(1e-9)) {
  Mat<Scalar> gen(3, 4);
  gen << 1, 1, 1, 1,
         1, -1, 0, 0,
         0, 0, 1, -1;
  Mat<Scalar> fac(4, 3);
  fac << 1, 1, 1,
         1, 1, -1,
         1, -1, 1,
         1, -1, -1;
  Vec<Scalar> u(3);
  u << 1, 0, 0;
  return ConeModel<Scalar>::polyhedral(std::move(gen), std::move(fac),
                                       std::move(u), tol);
}

inline void require_same_model(const void* a, const void* b, const char* where) {
  if (a != b)
    throw std::invalid_argument(std::string(where) + ": objects live on different models");
}

/// An element of the order interval [0, u]; the value type of the interval
/// effect algebra. Construction validates both cone memberships eagerly.
template <std::floating_point Scalar = double>
struct Effect {
  ConeModelPtr<Scalar> model;
  Vec<Scalar> vector;

  Effect(ConeModelPtr<Scalar> m, Vec<Scalar> v)
      : model(std::move(m)), vector(std::move(v)) {
    if (!model) throw std::invalid_argument("Effect: null model");
    model->check_dim(vector);
    if (!model->contains(vector))
      throw std::invalid_argument("Effect: vector is not in the positive cone");
    if (!model->contains(model->unit() - vector))
      throw std::invalid_argument("Effect: vector exceeds the order unit");
  }
};

template <std::floating_point Scalar>
Effect<Scalar> zero_effect(const ConeModelPtr<Scalar>& m) {
  return Effect<Scalar>(m, Vec<Scalar>::Zero(m->dim()));
}

template <std::floating_point Scalar>
Effect<Scalar> unit_effect(const ConeModelPtr<Scalar>& m) {
  return Effect<Scalar>(m, m->unit());
}

template <std::floating_point Scalar>
bool cone_contains(const ConeModelPtr<Scalar>& m, const Vec<Scalar>& x) {
  return m->contains(x);
}

template <std::floating_point Scalar>
bool leq(const ConeModelPtr<Scalar>& m, const Vec<Scalar>& x, const Vec<Scalar>& y) {
  m->check_dim(x);
  m->check_dim(y);
  return m->leq(x, y);
}

/// a and b are orthogonal (summable) when a + b <= u.
template <std::floating_point Scalar>
bool effect_perp(const Effect<Scalar>& a, const Effect<Scalar>& b) {
  require_same_model(a.model.get(), b.model.get(), "effect_perp");
  return a.model->leq(a.vector + b.vector, a.model->unit());
}

/// The partial sum of the effect algebra; defined only when a perp b.
template <std::floating_point Scalar>
Effect<Scalar> effect_add(const Effect<Scalar>& a, const Effect<Scalar>& b) {
  if (!effect_perp(a, b))
    throw std::invalid_argument("effect_add: a + b exceeds the unit; the partial sum is undefined");
  return Effect<Scalar>(a.model, a.vector + b.vector);
}

template <std::floating_point Scalar>
Effect<Scalar> effect_scale(Scalar lambda, const Effect<Scalar>& a) {
  if (lambda < Scalar(0) || lambda > Scalar(1))
    throw std::invalid_argument("effect_scale: lambda outside [0,1]");
  return Effect<Scalar>(a.model, lambda * a.vector);
}

template <std::floating_point Scalar>
Effect<Scalar> complement(const Effect<Scalar>& a) {
  return Effect<Scalar>(a.model, a.model->unit() - a.vector);
}

}  // namespace effalg

#endif  // EFFALG_CONE_HPP
