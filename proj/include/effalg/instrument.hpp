#ifndef EFFALG_INSTRUMENT_HPP
#define EFFALG_INSTRUMENT_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "effalg/observable.hpp"
#include "effalg/operation.hpp"

namespace effalg {

/// A finite outcome-indexed family of operations whose sum is a channel.
template <std::floating_point Scalar = double>
struct Instrument {
  std::vector<std::string> outcomes;
  std::vector<Operation<Scalar>> ops;

  Instrument(std::vector<std::string> labels, std::vector<Operation<Scalar>> o)
      : outcomes(std::move(labels)), ops(std::move(o)) {
    if (outcomes.empty() || outcomes.size() != ops.size())
      throw std::invalid_argument("Instrument: outcomes and operations differ in length");
    std::set<std::string> seen(outcomes.begin(), outcomes.end());
    if (seen.size() != outcomes.size())
      throw std::invalid_argument("Instrument: duplicate outcome label");
    for (const auto& op : ops) {
      require_same_model(source().get(), op.source().get(), "Instrument");
      require_same_model(target().get(), op.target().get(), "Instrument");
    }
    Mat<Scalar> sum = Mat<Scalar>::Zero(source()->dim(), target()->dim());
    for (const auto& op : ops) sum += op.dual();
    if ((sum * target()->unit() - source()->unit())
            .template lpNorm<Eigen::Infinity>() >
        source()->tol() * Scalar(ops.size()))
      throw std::invalid_argument("Instrument: the summed operation is not a channel");
  }

  const ConeModelPtr<Scalar>& source() const { return ops.front().source(); }
  const ConeModelPtr<Scalar>& target() const { return ops.front().target(); }
  Index size() const { return static_cast<Index>(outcomes.size()); }

  Index index_of(const std::string& label) const {
    for (size_t i = 0; i < outcomes.size(); ++i)
      if (outcomes[i] == label) return static_cast<Index>(i);
    throw std::invalid_argument("Instrument: unknown outcome label '" + label + "'");
  }
};

/// An instrument on a product outcome grid, row-major, first index outermost.
template <std::floating_point Scalar = double>
struct BiInstrument {
  std::vector<std::string> outcomes1, outcomes2;
  std::vector<Operation<Scalar>> cells;

  BiInstrument(std::vector<std::string> o1, std::vector<std::string> o2,
               std::vector<Operation<Scalar>> grid)
      : outcomes1(std::move(o1)), outcomes2(std::move(o2)), cells(std::move(grid)) {
    if (outcomes1.empty() || outcomes2.empty() ||
        cells.size() != outcomes1.size() * outcomes2.size())
      throw std::invalid_argument("BiInstrument: grid size mismatch");
    for (const auto& op : cells) {
      require_same_model(source().get(), op.source().get(), "BiInstrument");
      require_same_model(target().get(), op.target().get(), "BiInstrument");
    }
    Mat<Scalar> sum = Mat<Scalar>::Zero(source()->dim(), target()->dim());
    for (const auto& op : cells) sum += op.dual();
    if ((sum * target()->unit() - source()->unit())
            .template lpNorm<Eigen::Infinity>() >
        source()->tol() * Scalar(cells.size()))
      throw std::invalid_argument("BiInstrument: the summed operation is not a channel");
  }

  const ConeModelPtr<Scalar>& source() const { return cells.front().source(); }
  const ConeModelPtr<Scalar>& target() const { return cells.front().target(); }
  Index rows() const { return static_cast<Index>(outcomes1.size()); }
  Index cols() const { return static_cast<Index>(outcomes2.size()); }
  const Operation<Scalar>& cell(Index x, Index y) const {
    return cells[static_cast<size_t>(x * cols() + y)];
  }
};

/// The operation-valued measure I(Delta) = sum of I_x over x in Delta.
template <std::floating_point Scalar>
Operation<Scalar> ovm(const Instrument<Scalar>& ins,
                      const std::vector<std::string>& delta) {
  std::set<std::string> seen;
  Mat<Scalar> sum = Mat<Scalar>::Zero(ins.source()->dim(), ins.target()->dim());
  for (const auto& label : delta) {
    if (!seen.insert(label).second)
      throw std::invalid_argument("ovm: duplicate label '" + label + "' in subset");
    sum += ins.ops[static_cast<size_t>(ins.index_of(label))].dual();
  }
  return Operation<Scalar>(ins.source(), ins.target(), std::move(sum));
}

/// The unique observable with s(I^_x) = I_x(s)(u2).
template <std::floating_point Scalar>
Observable<Scalar> measured_observable(const Instrument<Scalar>& ins) {
  std::vector<Effect<Scalar>> effects;
  effects.reserve(ins.ops.size());
  for (const auto& op : ins.ops) effects.push_back(measured_effect(op));
  return Observable<Scalar>(ins.outcomes, std::move(effects));
}

template <std::floating_point Scalar>
BiObservable<Scalar> measured_bi_observable(const BiInstrument<Scalar>& k) {
  std::vector<Effect<Scalar>> effects;
  effects.reserve(k.cells.size());
  for (const auto& op : k.cells) effects.push_back(measured_effect(op));
  return BiObservable<Scalar>(k.outcomes1, k.outcomes2, std::move(effects));
}

template <std::floating_point Scalar>
Vec<Scalar> instrument_distribution(const Instrument<Scalar>& ins,
                                    const State<Scalar>& s) {
  return distribution(measured_observable(ins), s);
}

/// Row and column sums of a bi-instrument grid.
template <std::floating_point Scalar>
std::pair<Instrument<Scalar>, Instrument<Scalar>> marginal_instruments(
    const BiInstrument<Scalar>& k) {
  std::vector<Operation<Scalar>> first, second;
  for (Index x = 0; x < k.rows(); ++x) {
    Mat<Scalar> sum = Mat<Scalar>::Zero(k.source()->dim(), k.target()->dim());
    for (Index y = 0; y < k.cols(); ++y) sum += k.cell(x, y).dual();
    first.emplace_back(k.source(), k.target(), std::move(sum));
  }
  for (Index y = 0; y < k.cols(); ++y) {
    Mat<Scalar> sum = Mat<Scalar>::Zero(k.source()->dim(), k.target()->dim());
    for (Index x = 0; x < k.rows(); ++x) sum += k.cell(x, y).dual();
    second.emplace_back(k.source(), k.target(), std::move(sum));
  }
  return {Instrument<Scalar>(k.outcomes1, std::move(first)),
          Instrument<Scalar>(k.outcomes2, std::move(second))};
}

/// (I o J)_{xy} = J_y after I_x, with dual D_{I_x} D_{J_y}.
template <std::floating_point Scalar>
BiInstrument<Scalar> compose_instruments(const Instrument<Scalar>& i,
                                         const Instrument<Scalar>& j) {
  require_same_model(i.target().get(), j.source().get(), "compose_instruments");
  std::vector<Operation<Scalar>> cells;
  cells.reserve(static_cast<size_t>(i.size() * j.size()));
  for (Index x = 0; x < i.size(); ++x)
    for (Index y = 0; y < j.size(); ++y)
      cells.push_back(compose(i.ops[static_cast<size_t>(x)],
                              j.ops[static_cast<size_t>(y)]));
  return BiInstrument<Scalar>(i.outcomes, j.outcomes, std::move(cells));
}

/// True when k's marginal operation sums reproduce i and j to 1e-7.
template <std::floating_point Scalar>
bool verify_joint_instrument(const Instrument<Scalar>& i,
                             const Instrument<Scalar>& j,
                             const BiInstrument<Scalar>& k) {
  if (k.outcomes1 != i.outcomes || k.outcomes2 != j.outcomes) return false;
  if (k.source().get() != i.source().get() || k.target().get() != i.target().get())
    return false;
  const Scalar tol = Scalar(1e-7);
  for (Index x = 0; x < i.size(); ++x) {
    Mat<Scalar> sum = Mat<Scalar>::Zero(k.source()->dim(), k.target()->dim());
    for (Index y = 0; y < j.size(); ++y) sum += k.cell(x, y).dual();
    if ((sum - i.ops[static_cast<size_t>(x)].dual()).cwiseAbs().maxCoeff() > tol)
      return false;
  }
  for (Index y = 0; y < j.size(); ++y) {
    Mat<Scalar> sum = Mat<Scalar>::Zero(k.source()->dim(), k.target()->dim());
    for (Index x = 0; x < i.size(); ++x) sum += k.cell(x, y).dual();
    if ((sum - j.ops[static_cast<size_t>(y)].dual()).cwiseAbs().maxCoeff() > tol)
      return false;
  }
  return true;
}

/// LP over the dual-matrix entries of every grid cell: each cell must be a
/// positive map (facet f of the source cone, generator g of the target cone:
/// f . (Z g) >= 0) while the row and column sums are pinned to i and j.
template <std::floating_point Scalar>
LPProblem<Scalar> instrument_coexistence_lp(const Instrument<Scalar>& i,
                                            const Instrument<Scalar>& j) {
  const auto& src = i.source();
  const auto& tgt = i.target();
  if (src->kind() != ConeKind::Polyhedral || tgt->kind() != ConeKind::Polyhedral)
    throw std::invalid_argument("instrument_coexistence_lp: polyhedral models only");
  const Index d1 = src->dim(), d2 = tgt->dim();
  const Index cell_dim = d1 * d2;  // column-major vec of the d1 x d2 dual
  const auto& fac = src->facets();
  const auto& gen = tgt->generators();

  Mat<Scalar> pos(fac.rows() * gen.cols(), cell_dim);
  for (Index f = 0; f < fac.rows(); ++f)
    for (Index g = 0; g < gen.cols(); ++g)
      for (Index c = 0; c < d2; ++c)
        for (Index r = 0; r < d1; ++r)
          pos(f * gen.cols() + g, c * d1 + r) = fac(f, r) * gen(c, g);

  const Index nx = i.size(), ny = j.size();
  LPProblem<Scalar> p;
  p.blocks.assign(static_cast<size_t>(nx * ny), ConeBlock<Scalar>{cell_dim, pos});
  p.eq = Mat<Scalar>::Zero(cell_dim * (nx + ny), nx * ny * cell_dim);
  p.rhs = Vec<Scalar>(cell_dim * (nx + ny));
  for (Index x = 0; x < nx; ++x) {
    p.rhs.segment(x * cell_dim, cell_dim) = Eigen::Map<const Vec<Scalar>>(
        i.ops[static_cast<size_t>(x)].dual().data(), cell_dim);
    for (Index y = 0; y < ny; ++y)
      for (Index c = 0; c < cell_dim; ++c)
        p.eq(x * cell_dim + c, (x * ny + y) * cell_dim + c) = 1;
  }
  for (Index y = 0; y < ny; ++y) {
    p.rhs.segment((nx + y) * cell_dim, cell_dim) = Eigen::Map<const Vec<Scalar>>(
        j.ops[static_cast<size_t>(y)].dual().data(), cell_dim);
    for (Index x = 0; x < nx; ++x)
      for (Index c = 0; c < cell_dim; ++c)
        p.eq((nx + y) * cell_dim + c, (x * ny + y) * cell_dim + c) = 1;
  }
  return p;
}

template <std::floating_point Scalar = double>
struct InstrumentCoexistence {
  Decision decision = Decision::Undecided;
  std::optional<BiInstrument<Scalar>> witness;
  std::optional<FeasibilityResult<Scalar>> feasibility;
};

namespace detail {

template <std::floating_point Scalar>
bool instruments_equal(const Instrument<Scalar>& a, const Instrument<Scalar>& b) {
  if (a.outcomes != b.outcomes) return false;
  for (size_t x = 0; x < a.ops.size(); ++x)
    if ((a.ops[x].dual() - b.ops[x].dual()).cwiseAbs().maxCoeff() >
        a.source()->tol())
      return false;
  return true;
}

}  // namespace detail

/// Decide whether i and j are the marginals of one bi-instrument.
/// Polyhedral models get a complete LP decision; psd models only verify a
/// supplied candidate.
template <std::floating_point Scalar>
InstrumentCoexistence<Scalar> instruments_coexist(
    const Instrument<Scalar>& i, const Instrument<Scalar>& j,
    const BiInstrument<Scalar>* candidate = nullptr) {
  require_same_model(i.source().get(), j.source().get(), "instruments_coexist");
  require_same_model(i.target().get(), j.target().get(), "instruments_coexist");
  InstrumentCoexistence<Scalar> out;

  if (candidate) {
    out.decision = verify_joint_instrument(i, j, *candidate) ? Decision::Yes
                                                             : Decision::Undecided;
    if (out.decision == Decision::Yes) out.witness = *candidate;
    return out;
  }

  if (detail::instruments_equal(i, j)) {
    std::vector<Operation<Scalar>> cells;
    for (Index x = 0; x < i.size(); ++x)
      for (Index y = 0; y < i.size(); ++y)
        cells.push_back(x == y ? i.ops[static_cast<size_t>(x)]
                               : zero_operation(i.source(), i.target()));
    out.decision = Decision::Yes;
    out.witness = BiInstrument<Scalar>(i.outcomes, j.outcomes, std::move(cells));
    return out;
  }

  if (i.source()->kind() != ConeKind::Polyhedral ||
      i.target()->kind() != ConeKind::Polyhedral)
    return out;  // Undecided

  const auto lp = instrument_coexistence_lp(i, j);
  auto res = solve_feasibility(lp);
  if (res.status == FeasStatus::Feasible) {
    const Index d1 = i.source()->dim(), d2 = i.target()->dim();
    std::vector<Operation<Scalar>> cells;
    for (Index c = 0; c < i.size() * j.size(); ++c) {
      Mat<Scalar> dual = Eigen::Map<const Mat<Scalar>>(
          res.point.segment(c * d1 * d2, d1 * d2).data(), d1, d2);
      cells.emplace_back(i.source(), i.target(), std::move(dual));
    }
    out.decision = Decision::Yes;
    out.witness = BiInstrument<Scalar>(i.outcomes, j.outcomes, std::move(cells));
    if (!verify_joint_instrument(i, j, *out.witness))
      throw std::runtime_error("instruments_coexist: solver witness failed re-verification");
  } else {
    out.decision = Decision::No;
  }
  out.feasibility = std::move(res);
  return out;
}

/// Coexisting instruments measure coexisting observables: k's measured
/// bi-observable must be a joint bi-observable for the measured observables
/// of i and j.
template <std::floating_point Scalar>
bool coexistence_propagates(const Instrument<Scalar>& i,
                            const Instrument<Scalar>& j,
                            const BiInstrument<Scalar>& k) {
  if (!verify_joint_instrument(i, j, k))
    throw std::invalid_argument(
        "coexistence_propagates: k is not a joint bi-instrument for i and j");
  return verify_joint_observable(measured_observable(i), measured_observable(j),
                                 measured_bi_observable(k));
}

/// (A[I]B)_{xy} = I_x*(B_y); requires that the instrument measures A.
template <std::floating_point Scalar>
BiObservable<Scalar> sequential_product_observables(const Observable<Scalar>& a,
                                                    const Instrument<Scalar>& ins,
                                                    const Observable<Scalar>& b) {
  require_same_model(a.model().get(), ins.source().get(),
                     "sequential_product_observables");
  require_same_model(b.model().get(), ins.target().get(),
                     "sequential_product_observables");
  if (a.outcomes != ins.outcomes)
    throw std::invalid_argument(
        "sequential_product_observables: outcome labels differ from the instrument");
  const Scalar tol = Scalar(10) * a.model()->tol();
  std::vector<Effect<Scalar>> cells;
  for (Index x = 0; x < a.size(); ++x) {
    const auto& op = ins.ops[static_cast<size_t>(x)];
    if ((op.dual() * ins.target()->unit() - a.effects[static_cast<size_t>(x)].vector)
            .template lpNorm<Eigen::Infinity>() > tol)
      throw std::invalid_argument(
          "sequential_product_observables: the instrument does not measure this observable");
    for (Index y = 0; y < b.size(); ++y)
      cells.push_back(dual_apply(op, b.effects[static_cast<size_t>(y)]));
  }
  return BiObservable<Scalar>(a.outcomes, b.outcomes, std::move(cells));
}

/// (B|[I]A)_y = sum_x I_x*(B_y); the second marginal of A[I]B.
template <std::floating_point Scalar>
Observable<Scalar> condition_observable(const Observable<Scalar>& b,
                                        const Observable<Scalar>& a,
                                        const Instrument<Scalar>& ins) {
  auto grid = sequential_product_observables(a, ins, b);
  return marginals(grid).second;
}

}  // namespace effalg

#endif  // EFFALG_INSTRUMENT_HPP
