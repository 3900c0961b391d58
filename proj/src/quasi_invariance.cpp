#include "quasi/quasi_invariance.hpp"

#include <cmath>
#include <string>

#include "quasi/errors.hpp"

namespace quasi {

namespace {

std::string unit_label(Index n, Index k) {
  return "E_" + std::to_string(k / n) + std::to_string(k % n);
}

Witness at(std::size_t g, std::string location) { return Witness{g, std::nullopt, std::move(location)}; }

void require_strong(const CocycleFamily& family, const char* what) {
  if (!family.strongly_quasi()) {
    throw NotStronglyQuasiInvariant(std::string(what) + " needs a strongly quasi-invariant family");
  }
}

CocycleFamily classify(const Matrix& density, const GroupAction& action, const Tolerance& tol) {
  if (density.rows() != action.dim()) throw DimensionMismatch("state and action dimensions differ");
  std::vector<Matrix> cocycles;
  cocycles.reserve(action.order());
  double herm = 0.0;
  double ident = 0.0;
  bool all_hermitian = true;
  bool all_identity = true;
  const Matrix id = identity(action.dim());
  for (std::size_t g = 0; g < action.order(); ++g) {
    Matrix x = cocycle_from_density(density, action.map(g).implementing_unitary());
    const double scale = max_entry_norm(x);
    const double h = hermitian_deviation(x);
    const double d = max_entry_deviation(x, id);
    herm = std::max(herm, h);
    ident = std::max(ident, d);
    all_hermitian = all_hermitian && h <= tol.threshold(scale, scale);
    all_identity = all_identity && d <= tol.threshold(scale, 1.0);
    cocycles.push_back(std::move(x));
  }
  InvarianceClass cls = InvarianceClass::quasi_only;
  if (all_hermitian) cls = all_identity ? InvarianceClass::invariant : InvarianceClass::strongly_quasi;
  return CocycleFamily(action, density, std::move(cocycles), cls, herm, ident);
}

}  // namespace

FaithfulState::FaithfulState(const Matrix& density, const Tolerance& tol) {
  if (density.rows() == 0 || density.rows() != density.cols()) {
    throw DimensionMismatch("density must be a non-empty square matrix");
  }
  if (!is_hermitian(density, tol)) {
    throw NotHermitian("density is not Hermitian (deviation " +
                       std::to_string(hermitian_deviation(density)) + ")");
  }
  rho_ = (density + density.adjoint()) / 2.0;
  const double trace = rho_.trace().real();
  if (std::abs(trace - 1.0) > tol.threshold(1.0, 1.0)) {
    throw NotFaithful("density trace is " + std::to_string(trace) + ", not 1");
  }
  spectrum_ = hermitian_eigen(rho_, tol);
  if (spectrum_.values(0) <= tol.abs()) {
    throw NotFaithful("density has eigenvalue " + std::to_string(spectrum_.values(0)) +
                      " <= tolerance");
  }
}

FaithfulState FaithfulState::maximally_mixed(Index n) {
  return FaithfulState(identity(n) / static_cast<double>(n));
}

cplx FaithfulState::evaluate(const Matrix& a) const {
  if (a.rows() != dim() || a.cols() != dim()) throw DimensionMismatch("state evaluation");
  return (rho_ * a).trace();
}

LinearFunctional::LinearFunctional(Matrix density, const Tolerance& tol) : d_(std::move(density)) {
  if (d_.rows() == 0 || d_.rows() != d_.cols()) {
    throw DimensionMismatch("functional density must be a non-empty square matrix");
  }
  Eigen::JacobiSVD<Matrix> svd(d_);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= tol.abs()) throw NotFaithful("functional density is singular");
}

cplx LinearFunctional::evaluate(const Matrix& a) const {
  if (a.rows() != dim() || a.cols() != dim()) throw DimensionMismatch("functional evaluation");
  return (d_ * a).trace();
}

bool LinearFunctional::is_faithful_state(const Tolerance& tol) const {
  try {
    FaithfulState probe(d_, tol);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::string_view class_name(InvarianceClass c) {
  switch (c) {
    case InvarianceClass::invariant:
      return "G-invariant";
    case InvarianceClass::strongly_quasi:
      return "strongly-quasi-invariant";
    case InvarianceClass::quasi_only:
      return "quasi-invariant-only";
  }
  return "unknown";
}

Matrix cocycle_from_density(const Matrix& density, const Matrix& unitary) {
  if (density.rows() != unitary.rows()) throw DimensionMismatch("cocycle: density vs unitary");
  const Matrix rhs = unitary.adjoint() * density * unitary;
  return density.partialPivLu().solve(rhs);
}

Matrix cocycle_of(const FaithfulState& state, const GroupAction& action, std::size_t g) {
  if (state.dim() != action.dim()) throw DimensionMismatch("state and action dimensions differ");
  return cocycle_from_density(state.density(), action.map(g).implementing_unitary());
}

CocycleFamily::CocycleFamily(GroupAction action, Matrix density, std::vector<Matrix> cocycles,
                             InvarianceClass cls, double hermitian_deviation,
                             double identity_deviation)
    : action_(std::move(action)),
      density_(std::move(density)),
      cocycles_(std::move(cocycles)),
      class_(cls),
      hermitian_deviation_(hermitian_deviation),
      identity_deviation_(identity_deviation) {}

CocycleFamily classify_invariance(const FaithfulState& state, const GroupAction& action,
                                  const Tolerance& tol) {
  return classify(state.density(), action, tol);
}

CocycleFamily classify_invariance(const LinearFunctional& functional, const GroupAction& action,
                                  const Tolerance& tol) {
  return classify(functional.density(), action, tol);
}

Matrix kappa(const CocycleFamily& family) {
  require_strong(family, "kappa");
  Matrix sum = Matrix::Zero(family.action().dim(), family.action().dim());
  for (const auto& x : family.cocycles()) sum += x;
  sum /= static_cast<double>(family.cocycles().size());
  return (sum + sum.adjoint()) / 2.0;
}

FaithfulState averaged_state(const FaithfulState& state, const CocycleFamily& family,
                             const Tolerance& tol) {
  const Matrix k = kappa(family);
  return FaithfulState(state.density() * k, tol);
}

AlgebraBasis centralizer(const FaithfulState& state, const Tolerance& tol) {
  return commutant_of({state.density()}, state.dim(), tol);
}

AlgebraBasis cocycle_algebra(const CocycleFamily& family, const Tolerance& tol) {
  return generate_algebra(family.cocycles(), family.action().dim(), tol);
}

Verdict check_defining_relation(const CocycleFamily& family, const Tolerance& tol) {
  DeviationTracker tr;
  const Index n = family.action().dim();
  const Matrix& d = family.density();
  const auto units = matrix_units(n);
  for (std::size_t g = 0; g < family.action().order(); ++g) {
    for (Index k = 0; k < n * n; ++k) {
      const Matrix& e = units[static_cast<std::size_t>(k)];
      const cplx lhs = (d * family.action().apply(g, e)).trace();
      const cplx rhs = (d * family.cocycle(g) * e).trace();
      observe_equal(tr, lhs, rhs, tol, at(g, unit_label(n, k)));
    }
  }
  return tr.finish("qi.cocycle.defining_relation");
}

Verdict check_cocycle_identity(const CocycleFamily& family, const Tolerance& tol) {
  DeviationTracker tr;
  const std::size_t e = family.action().group().identity();
  observe_equal(tr, family.cocycle(e), identity(family.action().dim()), tol, at(e, "x_e"));
  return tr.finish("qi.cocycle.identity");
}

Verdict check_chain_rule(const CocycleFamily& family, const Tolerance& tol) {
  DeviationTracker tr;
  const auto& action = family.action();
  const auto& group = action.group();
  for (std::size_t g2 = 0; g2 < action.order(); ++g2) {
    for (std::size_t g1 = 0; g1 < action.order(); ++g1) {
      // x_{g2 g1} = x_{g1} g1^{-1}(x_{g2})
      const Matrix lhs = family.cocycle(group.multiply(g2, g1));
      const Matrix rhs = family.cocycle(g1) * action.map(g1).apply_inverse(family.cocycle(g2));
      observe_equal(tr, lhs, rhs, tol,
                    at(g2, "pair (" + std::to_string(g2) + ", " + std::to_string(g1) + ")"));
    }
  }
  return tr.finish("qi.cocycle.chain_rule");
}

Verdict check_inverse_law(const CocycleFamily& family, const Tolerance& tol) {
  DeviationTracker tr;
  const auto& action = family.action();
  for (std::size_t g = 0; g < action.order(); ++g) {
    const Matrix inv = family.cocycle(g).partialPivLu().inverse();
    const Matrix rhs = action.map(g).apply_inverse(family.cocycle(action.group().inverse(g)));
    observe_equal(tr, inv, rhs, tol, at(g, "x_g^-1"));
  }
  return tr.finish("qi.cocycle.inverse_law");
}

Verdict check_trace_symmetry(const FaithfulState& state, const CocycleFamily& family,
                             const Tolerance& tol) {
  DeviationTracker tr;
  const Index n = state.dim();
  const auto units = matrix_units(n);
  for (std::size_t g = 0; g < family.action().order(); ++g) {
    const Matrix& x = family.cocycle(g);
    for (Index k = 0; k < n * n; ++k) {
      const Matrix& a = units[static_cast<std::size_t>(k)];
      observe_equal(tr, state.evaluate(x * a), state.evaluate(a * x.adjoint()), tol,
                    at(g, unit_label(n, k)));
    }
  }
  return tr.finish("qi.cocycle.trace_symmetry");
}

Verdict check_strong_structure(const FaithfulState& state, const CocycleFamily& family,
                               const Tolerance& tol) {
  const char* id = "qi.strong.positive_commuting";
  if (!family.strongly_quasi()) {
    return not_applicable(id, "cocycles are not all Hermitian");
  }
  DeviationTracker tr;
  const auto& xs = family.cocycles();
  for (std::size_t g = 0; g < xs.size(); ++g) {
    observe_equal(tr, xs[g], Matrix(xs[g].adjoint()), tol, at(g, "hermiticity"));
    const auto spectrum = hermitian_eigen((xs[g] + xs[g].adjoint()) / 2.0, tol);
    // Positivity: a negative eigenvalue is a deviation of its own size.
    const double lowest = spectrum.values(0);
    tr.observe(lowest > tol.abs() ? 0.0 : tol.abs() - lowest, tol.abs(), at(g, "smallest eigenvalue"));
    for (std::size_t h = g + 1; h < xs.size(); ++h) {
      observe_equal(tr, xs[g] * xs[h], xs[h] * xs[g], tol,
                    at(g, "commutator with x_" + std::to_string(h)));
    }
    observe_equal(tr, state.density() * xs[g], xs[g] * state.density(), tol,
                  at(g, "commutator with rho"));
  }
  const AlgebraBasis c = cocycle_algebra(family, tol);
  const auto abel = is_abelian(c, tol);
  tr.observe(abel.worst_commutator, tol.threshold(1.0, 1.0), Witness{{}, {}, "cocycle algebra"});
  const auto inside = span_contains(centralizer(state, tol), c, tol);
  tr.observe(inside.worst_residual, tol.threshold(1.0, 1.0),
             Witness{{}, {}, "cocycle algebra inside centralizer"});
  return tr.finish(id, Hypothesis::satisfied);
}

Verdict check_kappa_centralizer(const FaithfulState& state, const CocycleFamily& family,
                                const Tolerance& tol) {
  const char* id = "qi.kappa.centralizer";
  if (!family.strongly_quasi()) return not_applicable(id, "cocycles are not all Hermitian");
  DeviationTracker tr;
  const Matrix k = kappa(family);
  const auto spectrum = hermitian_eigen(k, tol);
  const double lowest = spectrum.values(0);
  tr.observe(lowest > tol.abs() ? 0.0 : tol.abs() - lowest, tol.abs(),
             Witness{{}, {}, "kappa smallest eigenvalue"});
  const Matrix k_inv = hermitian_power(spectrum, -1.0);
  const FaithfulState averaged = averaged_state(state, family, tol);
  for (const auto* rho : {&state.density(), &averaged.density()}) {
    const std::string which = rho == &state.density() ? "phi" : "phi_G";
    observe_equal(tr, Matrix(*rho * k), Matrix(k * *rho), tol,
                  Witness{{}, {}, "kappa in Centr(" + which + ")"});
    observe_equal(tr, Matrix(*rho * k_inv), Matrix(k_inv * *rho), tol,
                  Witness{{}, {}, "kappa^-1 in Centr(" + which + ")"});
  }
  return tr.finish(id, Hypothesis::satisfied);
}

Verdict check_averaged_state(const FaithfulState& state, const CocycleFamily& family,
                             const Tolerance& tol) {
  const char* id = "qi.averaged_state.invariant";
  if (!family.strongly_quasi()) return not_applicable(id, "cocycles are not all Hermitian");
  DeviationTracker tr;
  const Matrix k = kappa(family);
  const FaithfulState averaged = averaged_state(state, family, tol);
  const auto& action = family.action();
  const Index n = state.dim();
  const auto units = matrix_units(n);
  for (Index u = 0; u < n * n; ++u) {
    const Matrix& a = units[static_cast<std::size_t>(u)];
    const cplx base = averaged.evaluate(a);
    observe_equal(tr, state.evaluate(k * a), state.evaluate(mean_over_group(action, a)), tol,
                  Witness{{}, {}, "phi(kappa a) vs phi(E_G a) at " + unit_label(n, u)});
    for (std::size_t g = 0; g < action.order(); ++g) {
      observe_equal(tr, averaged.evaluate(action.apply(g, a)), base, tol,
                    at(g, "phi_G(g a) at " + unit_label(n, u)));
    }
  }
  return tr.finish(id, Hypothesis::satisfied);
}

Verdict check_fixed_cocycle_lemma(const CocycleFamily& family, const Tolerance& tol) {
  const char* id = "qi.lemma.fixed_cocycle_is_identity";
  if (!family.strongly_quasi()) return not_applicable(id, "cocycles are not all Hermitian");
  const AlgebraBasis fixed = fixed_point_algebra(family.action(), tol);
  DeviationTracker tr;
  bool premise_seen = false;
  const Matrix id_n = identity(family.action().dim());
  for (std::size_t g = 0; g < family.action().order(); ++g) {
    const Matrix& x = family.cocycle(g);
    const double scale = hs_norm(x);
    if (fixed.residual(x) > tol.threshold(scale, scale)) continue;
    premise_seen = true;
    observe_equal(tr, x, id_n, tol, at(g, "x_g in F(G)"));
  }
  return tr.finish(id, Hypothesis::satisfied,
                   premise_seen ? std::string() : "no cocycle lies in F(G); holds vacuously");
}

}  // namespace quasi
