#ifndef EFFALG_FEASIBILITY_HPP
#define EFFALG_FEASIBILITY_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "effalg/cone.hpp"

namespace effalg {

/// One variable block z_k constrained to the polyhedral cone
/// {z : facets * z >= 0}. A nonnegative-orthant block uses the identity.
template <std::floating_point Scalar = double>
struct ConeBlock {
  Index dim;
  Mat<Scalar> facets;  // rows
};

/// Find z = (z_1,...,z_B), z_k in its cone, with eq * z = rhs.
template <std::floating_point Scalar = double>
struct LPProblem {
  std::vector<ConeBlock<Scalar>> blocks;
  Mat<Scalar> eq;
  Vec<Scalar> rhs;

  Index total_dim() const {
    Index n = 0;
    for (const auto& b : blocks) n += b.dim;
    return n;
  }
  Index total_facet_rows() const {
    Index n = 0;
    for (const auto& b : blocks) n += b.facets.rows();
    return n;
  }
  void validate() const {
    if (blocks.empty()) throw std::invalid_argument("LPProblem: no variable blocks");
    for (const auto& b : blocks)
      if (b.dim <= 0 || b.facets.cols() != b.dim)
        throw std::invalid_argument("LPProblem: block facet width != block dim");
    if (eq.cols() != total_dim())
      throw std::invalid_argument("LPProblem: eq width != total variable dim");
    if (eq.rows() != rhs.size())
      throw std::invalid_argument("LPProblem: rhs length != eq rows");
  }
};

enum class FeasStatus { Feasible, Infeasible };

/// Feasible: point satisfies every constraint to 1e-7.
/// Infeasible: Farkas witness y = eq_multipliers with
///   y^T eq == facet_multipliers^T facets blockwise (facet_multipliers >= 0)
/// and y^T rhs < -1e-9, so y^T eq is nonnegative on the product cone while
/// y^T rhs is negative.
template <std::floating_point Scalar = double>
struct FeasibilityResult {
  FeasStatus status = FeasStatus::Infeasible;
  Vec<Scalar> point;              // total_dim, Feasible only
  Vec<Scalar> eq_multipliers;     // eq rows, Infeasible only
  Vec<Scalar> facet_multipliers;  // total facet rows, Infeasible only
};

namespace detail {

// Dense phase-1 tableau data for the standard form
//   [eq 0; F -I] (p - q, s) = (rhs; 0),  p, q, s >= 0.
template <std::floating_point Scalar>
struct StandardForm {
  Mat<Scalar> m;  // rows x cols
  Vec<Scalar> c;
  Index n_eq = 0;
  Index n_facet = 0;
  Index n_z = 0;  // width of one sign of the split
};

template <std::floating_point Scalar>
StandardForm<Scalar> build_standard_form(const LPProblem<Scalar>& p) {
  const Index nz = p.total_dim();
  const Index nf = p.total_facet_rows();
  const Index ne = p.eq.rows();
  StandardForm<Scalar> sf;
  sf.n_eq = ne;
  sf.n_facet = nf;
  sf.n_z = nz;
  sf.m = Mat<Scalar>::Zero(ne + nf, 2 * nz + nf);
  sf.c = Vec<Scalar>::Zero(ne + nf);
  sf.m.block(0, 0, ne, nz) = p.eq;
  sf.m.block(0, nz, ne, nz) = -p.eq;
  sf.c.head(ne) = p.rhs;
  Index col = 0, row = ne;
  for (const auto& b : p.blocks) {
    const Index fr = b.facets.rows();
    sf.m.block(row, col, fr, b.dim) = b.facets;
    sf.m.block(row, nz + col, fr, b.dim) = -b.facets;
    sf.m.block(row, 2 * nz + (row - ne), fr, fr) =
        -Mat<Scalar>::Identity(fr, fr);
    col += b.dim;
    row += fr;
  }
  return sf;
}

}  // namespace detail

/// Dense phase-1 simplex with Bland's anti-cycling rule; deterministic.
template <std::floating_point Scalar = double>
FeasibilityResult<Scalar> solve_feasibility(const LPProblem<Scalar>& p) {
  p.validate();
  const Scalar piv_tol = Scalar(1e-10);
  auto sf = detail::build_standard_form(p);
  const Index rows = sf.m.rows();
  const Index cols = sf.m.cols();

  // Flip rows so the rhs is nonnegative; remember signs for the certificate.
  Vec<Scalar> sign = Vec<Scalar>::Ones(rows);
  for (Index i = 0; i < rows; ++i)
    if (sf.c[i] < Scalar(0)) {
      sign[i] = Scalar(-1);
      sf.m.row(i) = -sf.m.row(i);
      sf.c[i] = -sf.c[i];
    }

  // Tableau: structural columns, artificial columns, rhs column.
  Mat<Scalar> tab(rows + 1, cols + rows + 1);
  tab.setZero();
  tab.block(0, 0, rows, cols) = sf.m;
  tab.block(0, cols, rows, rows) = Mat<Scalar>::Identity(rows, rows);
  tab.block(0, cols + rows, rows, 1) = sf.c;
  // Phase-1 objective row: reduced costs with the artificial basis.
  for (Index j = 0; j < cols; ++j) tab(rows, j) = -sf.m.col(j).sum();
  tab(rows, cols + rows) = -sf.c.sum();

  std::vector<Index> basis(static_cast<size_t>(rows));
  for (Index i = 0; i < rows; ++i) basis[static_cast<size_t>(i)] = cols + i;

  const Index max_iters = 2000 * (rows + cols) + 10000;
  for (Index iter = 0;; ++iter) {
    if (iter > max_iters)
      throw std::runtime_error("solve_feasibility: iteration limit exceeded");
    // Bland: entering column is the smallest index with negative reduced cost.
    Index enter = -1;
    for (Index j = 0; j < cols + rows; ++j)
      if (tab(rows, j) < -piv_tol) {
        enter = j;
        break;
      }
    if (enter < 0) break;
    // Ratio test; ties broken by the smallest basis label (Bland).
    Index leave = -1;
    Scalar best = Scalar(0);
    for (Index i = 0; i < rows; ++i) {
      const Scalar a = tab(i, enter);
      if (a > piv_tol) {
        const Scalar ratio = tab(i, cols + rows) / a;
        if (leave < 0 || ratio < best - piv_tol ||
            (ratio < best + piv_tol &&
             basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0)
      throw std::runtime_error("solve_feasibility: phase-1 objective unbounded");
    tab.row(leave) /= tab(leave, enter);
    for (Index i = 0; i <= rows; ++i)
      if (i != leave && tab(i, enter) != Scalar(0))
        tab.row(i) -= tab(i, enter) * tab.row(leave);
    basis[static_cast<size_t>(leave)] = enter;
  }

  const Scalar objective = -tab(rows, cols + rows);
  FeasibilityResult<Scalar> res;
  const Scalar feas_tol =
      Scalar(1e-9) * std::max(Scalar(1), sf.c.template lpNorm<Eigen::Infinity>());
  if (objective <= feas_tol) {
    res.status = FeasStatus::Feasible;
    Vec<Scalar> x = Vec<Scalar>::Zero(cols);
    for (Index i = 0; i < rows; ++i)
      if (basis[static_cast<size_t>(i)] < cols)
        x[basis[static_cast<size_t>(i)]] = tab(i, cols + rows);
    res.point = x.head(sf.n_z) - x.segment(sf.n_z, sf.n_z);
    return res;
  }

  // Farkas witness from the optimal duals: y*_i = 1 - r(artificial_i),
  // y = -sign .* y* proves infeasibility of the original rows.
  res.status = FeasStatus::Infeasible;
  Vec<Scalar> y(rows);
  for (Index i = 0; i < rows; ++i)
    y[i] = -sign[i] * (Scalar(1) - tab(rows, cols + i));
  res.eq_multipliers = y.head(sf.n_eq);
  res.facet_multipliers = -y.tail(sf.n_facet);
  return res;
}

namespace detail {

using Rational = boost::multiprecision::cpp_rational;

/// Best continued-fraction approximation with denominator <= max_den;
/// recovers rationals of small denominator exactly.
inline Rational rationalize(double x, long long max_den = 1000000) {
  if (!std::isfinite(x)) throw std::invalid_argument("rationalize: non-finite value");
  const bool neg = x < 0;
  double v = std::abs(x);
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int it = 0; it < 64; ++it) {
    const double fl = std::floor(v);
    if (fl > 9e17) break;
    const long long a = static_cast<long long>(fl);
    if (q1 != 0 && a > (max_den - q0) / q1) break;
    const long long p2 = a * p1 + p0;
    const long long q2 = a * q1 + q0;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double frac = v - fl;
    if (frac < 1e-15) break;
    v = 1.0 / frac;
  }
  if (q1 == 0) return Rational(0);
  Rational r(p1, q1);
  return neg ? -r : r;
}

template <std::floating_point Scalar>
std::vector<Rational> rationalize_all(const Vec<Scalar>& v) {
  std::vector<Rational> out(static_cast<size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) {
    double d = static_cast<double>(v[i]);
    if (std::abs(d) < 1e-12) d = 0.0;  // pivot dust
    out[static_cast<size_t>(i)] = rationalize(d);
  }
  return out;
}

}  // namespace detail

/// Re-check a result against its problem. Feasible points are checked in
/// floating point at 1e-7; Farkas certificates are re-verified in exact
/// rational arithmetic after rationalizing every input at denominator <= 1e6.
template <std::floating_point Scalar = double>
bool verify_certificate(const LPProblem<Scalar>& p,
                        const FeasibilityResult<Scalar>& r) {
  p.validate();
  if (r.status == FeasStatus::Feasible) {
    if (r.point.size() != p.total_dim()) return false;
    const Scalar tol = Scalar(1e-7);
    if ((p.eq * r.point - p.rhs).template lpNorm<Eigen::Infinity>() > tol)
      return false;
    Index off = 0;
    for (const auto& b : p.blocks) {
      if (b.facets.rows() > 0 &&
          (b.facets * r.point.segment(off, b.dim)).minCoeff() < -tol)
        return false;
      off += b.dim;
    }
    return true;
  }

  using detail::Rational;
  if (r.eq_multipliers.size() != p.eq.rows() ||
      r.facet_multipliers.size() != p.total_facet_rows())
    return false;
  const auto y = detail::rationalize_all(r.eq_multipliers);
  const auto mu = detail::rationalize_all(r.facet_multipliers);
  for (const auto& m : mu)
    if (m < 0) return false;

  // y^T rhs must be strictly negative.
  Rational ytb = 0;
  for (Index i = 0; i < p.rhs.size(); ++i)
    ytb += y[static_cast<size_t>(i)] * detail::rationalize(double(p.rhs[i]));
  if (!(ytb < 0)) return false;

  // Blockwise: (y^T eq)|_k == mu_k^T facets_k, i.e. the functional y^T eq
  // is a nonnegative combination of facet normals on every block.
  Index off = 0, frow = 0;
  for (const auto& b : p.blocks) {
    for (Index c = 0; c < b.dim; ++c) {
      Rational lhs = 0;
      for (Index i = 0; i < p.eq.rows(); ++i)
        lhs += y[static_cast<size_t>(i)] *
               detail::rationalize(double(p.eq(i, off + c)));
      Rational rhs = 0;
      for (Index f = 0; f < b.facets.rows(); ++f)
        rhs += mu[static_cast<size_t>(frow + f)] *
               detail::rationalize(double(b.facets(f, c)));
      if (lhs != rhs) return false;
    }
    off += b.dim;
    frow += b.facets.rows();
  }
  return true;
}

}  // namespace effalg

#endif  // EFFALG_FEASIBILITY_HPP
