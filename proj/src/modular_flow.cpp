#include "quasi/modular_flow.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "quasi/errors.hpp"

namespace quasi {

namespace {

std::string unit_label(Index n, Index k) {
  return "E_" + std::to_string(k / n) + std::to_string(k % n);
}

Witness at(std::optional<std::size_t> g, std::optional<double> t, std::string location) {
  return Witness{g, t, std::move(location)};
}

/// Max-entry distance of x from the scalar (Tr x / n) I.
double scalar_residual(const Matrix& x) {
  const Index n = x.rows();
  return max_entry_deviation(x, (x.trace() / static_cast<double>(n)) * identity(n));
}

bool all_in(const AlgebraBasis& outer, const std::vector<Matrix>& elements, const Tolerance& tol) {
  for (const auto& x : elements) {
    if (!outer.contains(x, tol)) return false;
  }
  return true;
}

}  // namespace

ModularFlow::ModularFlow(FaithfulState state, std::vector<double> sample_times, double relative_gap)
    : state_(std::move(state)), times_(std::move(sample_times)) {
  projections_ = quasi::spectral_projections(state_.density(), relative_gap);
}

std::vector<double> ModularFlow::default_sample_times() {
  return {0.0, 0.37, -0.37, 1.0, -1.0, 2.5, -2.5, std::numbers::pi};
}

Matrix ModularFlow::apply(const Matrix& a, double t) const {
  if (a.rows() != dim() || a.cols() != dim()) throw DimensionMismatch("modular flow operand");
  const Matrix u = unitary(t);
  return u * a * u.adjoint();
}

Matrix modular_invariant_expectation(const ModularFlow& flow, const Matrix& x) {
  if (x.rows() != flow.dim() || x.cols() != flow.dim()) {
    throw DimensionMismatch("pinching operand");
  }
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (const auto& p : flow.spectral_projections()) out += p * x * p;
  return out;
}

Matrix cesaro_flow_mean(const ModularFlow& flow, const Matrix& x, double horizon,
                        std::size_t nodes) {
  if (!(horizon > 0.0) || nodes < 2) throw InvalidParams("Cesaro mean needs T > 0 and >= 2 nodes");
  const auto& spectrum = flow.state().spectrum();
  const Matrix& v = spectrum.vectors;
  const Matrix y = v.adjoint() * x * v;
  const Index n = y.rows();
  const double h = 2.0 * horizon / static_cast<double>(nodes - 1);
  Matrix acc = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      const double omega = std::log(spectrum.values(j)) - std::log(spectrum.values(k));
      cplx sum = 0.0;
      for (std::size_t m = 0; m < nodes; ++m) {
        const double t = -horizon + h * static_cast<double>(m);
        const double w = (m == 0 || m + 1 == nodes) ? 0.5 : 1.0;
        sum += w * std::exp(cplx(0.0, omega * t));
      }
      acc(j, k) = y(j, k) * sum * h / (2.0 * horizon);
    }
  }
  return v * acc * v.adjoint();
}

FlowGroupCommutation check_flow_group_commutation(const ModularFlow& flow,
                                                  const CocycleFamily& family,
                                                  const Tolerance& tol) {
  const auto& action = family.action();
  if (action.dim() != flow.dim()) throw DimensionMismatch("flow and action dimensions differ");
  const Index n = flow.dim();
  const auto units = matrix_units(n);
  DeviationTracker tr;
  for (double t : flow.sample_times()) {
    const Matrix u = flow.unitary(t);
    for (std::size_t g = 0; g < action.order(); ++g) {
      for (Index k = 0; k < n * n; ++k) {
        const Matrix& a = units[static_cast<std::size_t>(k)];
        const Matrix lhs = u * action.apply(g, a) * u.adjoint();
        const Matrix rhs = action.apply(g, u * a * u.adjoint());
        observe_equal(tr, lhs, rhs, tol, at(g, t, unit_label(n, k)));
      }
    }
  }
  FlowGroupCommutation out;
  out.commute = !tr.violated();
  out.max_deviation = tr.max_deviation();
  out.central_cocycles = family.strongly_quasi();
  for (const auto& x : family.cocycles()) {
    const double r = scalar_residual(x);
    out.central_residual = std::max(out.central_residual, r);
    const double scale = max_entry_norm(x);
    if (r > tol.threshold(scale, scale)) out.central_cocycles = false;
  }
  const bool agree = out.commute == out.central_cocycles;
  out.verdict = boolean_verdict(
      "flow.group_commutation", agree,
      std::string("commute=") + (out.commute ? "true" : "false") +
          " central_cocycles=" + (out.central_cocycles ? "true" : "false"));
  out.verdict.max_deviation = out.max_deviation;
  if (tr.violated()) out.verdict.witnesses = tr.finish("").witnesses;
  return out;
}

Verdict check_flow_invariants(const ModularFlow& flow, const Tolerance& tol) {
  DeviationTracker tr;
  const Index n = flow.dim();
  const auto units = matrix_units(n);
  observe_equal(tr, flow.unitary(0.0), identity(n), tol, at({}, 0.0, "sigma_0"));
  const auto& times = flow.sample_times();
  for (double t : times) {
    for (double s : times) {
      observe_equal(tr, Matrix(flow.unitary(t) * flow.unitary(s)), flow.unitary(t + s), tol,
                    at({}, t, "group law with s=" + std::to_string(s)));
    }
    for (Index k = 0; k < n * n; ++k) {
      const Matrix& a = units[static_cast<std::size_t>(k)];
      observe_equal(tr, flow.state().evaluate(flow.apply(a, t)), flow.state().evaluate(a), tol,
                    at({}, t, "phi invariance " + unit_label(n, k)));
    }
  }
  return tr.finish("flow.invariants");
}

Verdict check_pinching(const ModularFlow& flow, const Tolerance& tol) {
  DeviationTracker tr;
  const Index n = flow.dim();
  const auto units = matrix_units(n);
  std::vector<Matrix> range;
  for (Index k = 0; k < n * n; ++k) {
    const Matrix& x = units[static_cast<std::size_t>(k)];
    const Matrix tx = modular_invariant_expectation(flow, x);
    range.push_back(tx);
    observe_equal(tr, modular_invariant_expectation(flow, tx), tx, tol,
                  at({}, {}, "idempotence " + unit_label(n, k)));
    observe_equal(tr, flow.state().evaluate(tx), flow.state().evaluate(x), tol,
                  at({}, {}, "phi preserved " + unit_label(n, k)));
    for (double t : flow.sample_times()) {
      observe_equal(tr, flow.apply(tx, t), tx, tol, at({}, t, "sigma fixed " + unit_label(n, k)));
    }
  }
  const AlgebraBasis image = span_of(n, range, tol);
  const AlgebraBasis centr = centralizer(flow.state(), tol);
  tr.observe(image.dimension() == centr.dimension() ? 0.0 : 1.0, 0.5,
             at({}, {}, "range dimension " + std::to_string(image.dimension()) + " vs centralizer " +
                            std::to_string(centr.dimension())));
  tr.observe(span_contains(centr, image, tol).worst_residual, tol.threshold(1.0, 1.0),
             at({}, {}, "range inside centralizer"));
  tr.observe(span_contains(image, centr, tol).worst_residual, tol.threshold(1.0, 1.0),
             at({}, {}, "centralizer inside range"));
  return tr.finish("flow.expectation.pinching");
}

Verdict check_kappa_twist(const ModularFlow& flow, const CocycleFamily& family,
                          const Tolerance& tol) {
  const char* id = "flow.twisted_by_kappa";
  if (!family.strongly_quasi()) return not_applicable(id, "cocycles are not all Hermitian");
  const Matrix k = kappa(family);
  const FaithfulState averaged = averaged_state(flow.state(), family, tol);
  const ModularFlow flow_g(averaged, flow.sample_times());
  const auto k_spectrum = hermitian_eigen(k, tol);
  const Index n = flow.dim();
  const auto units = matrix_units(n);
  DeviationTracker tr;
  for (double t : flow.sample_times()) {
    const Matrix k_it = hermitian_power(k_spectrum, cplx(0.0, t));
    observe_equal(tr, flow.apply(k, t), k, tol, at({}, t, "kappa fixed by sigma"));
    observe_equal(tr, flow_g.apply(k, t), k, tol, at({}, t, "kappa fixed by sigma^G"));
    for (Index u = 0; u < n * n; ++u) {
      const Matrix& a = units[static_cast<std::size_t>(u)];
      observe_equal(tr, flow.apply(a, t), Matrix(k_it.adjoint() * flow_g.apply(a, t) * k_it), tol,
                    at({}, t, "twist " + unit_label(n, u)));
      observe_equal(tr, flow.state().evaluate(flow_g.apply(a, t)), flow.state().evaluate(a), tol,
                    at({}, t, "phi invariant under sigma^G " + unit_label(n, u)));
    }
  }
  return tr.finish(id, Hypothesis::satisfied);
}

Verdict check_factor_cocycle_relation(const ModularFlow& flow, const CocycleFamily& family,
                                      const Tolerance& tol) {
  if (!family.strongly_quasi()) {
    throw NotStronglyQuasiInvariant("factor cocycle relation needs Hermitian cocycles");
  }
  const auto& action = family.action();
  const Index n = flow.dim();
  const auto units = matrix_units(n);
  DeviationTracker tr;
  for (std::size_t g = 0; g < action.order(); ++g) {
    const Matrix& xg = family.cocycle(g);
    const auto spectrum = hermitian_eigen((xg + xg.adjoint()) / 2.0, tol);
    for (double t : flow.sample_times()) {
      const Matrix x_it = hermitian_power(spectrum, cplx(0.0, t));
      for (Index k = 0; k < n * n; ++k) {
        const Matrix& a = units[static_cast<std::size_t>(k)];
        const Matrix lhs = action.map(g).apply_inverse(flow.apply(a, t));
        const Matrix rhs = x_it * flow.apply(action.map(g).apply_inverse(a), t) * x_it.adjoint();
        observe_equal(tr, lhs, rhs, tol, at(g, t, unit_label(n, k)));
      }
    }
  }
  return tr.finish("flow.factor_cocycle_relation", Hypothesis::satisfied);
}

Verdict check_invariant_case(const FlowGroupCommutation& commutation, const CocycleFamily& family) {
  const char* id = "flow.invariant_case";
  if (family.classification() != InvarianceClass::invariant) {
    return not_applicable(id, "state is not G-invariant");
  }
  Verdict v = boolean_verdict(id, commutation.commute, "", Hypothesis::satisfied);
  v.max_deviation = commutation.max_deviation;
  return v;
}

Verdict check_state_level_commutation(const ModularFlow& flow, const CocycleFamily& family,
                                      const Tolerance& tol) {
  const char* id = "flow.state_level_commutation";
  if (!family.strongly_quasi()) return not_applicable(id, "cocycles are not all Hermitian");
  const auto& action = family.action();
  const auto& phi = flow.state();
  const Index n = flow.dim();
  const auto units = matrix_units(n);
  DeviationTracker tr;
  for (std::size_t g = 0; g < action.order(); ++g) {
    for (double t : flow.sample_times()) {
      for (Index k = 0; k < n * n; ++k) {
        const Matrix& a = units[static_cast<std::size_t>(k)];
        const cplx lhs = phi.evaluate(action.apply(g, flow.apply(a, t)));
        observe_equal(tr, lhs, phi.evaluate(flow.apply(action.apply(g, a), t)), tol,
                      at(g, t, unit_label(n, k)));
        observe_equal(tr, lhs, phi.evaluate(action.apply(g, a)), tol,
                      at(g, t, "phi_g sigma-invariant " + unit_label(n, k)));
      }
    }
  }
  return tr.finish(id, Hypothesis::satisfied);
}

MeanModularCommutation check_mean_modular_commutation(const ModularFlow& flow,
                                                      const CocycleFamily& family,
                                                      const FlowGroupCommutation& commutation,
                                                      const Tolerance& tol) {
  MeanModularCommutation out;
  const char* state_id = "flow.mean_state_level";
  const char* map_id = "flow.mean_map_level";
  const char* sufficient_id = "flow.sufficient_condition";
  if (!family.strongly_quasi()) {
    out.state_level = not_applicable(state_id, "cocycles are not all Hermitian");
    out.map_level = not_applicable(map_id, "cocycles are not all Hermitian");
    out.sufficient_condition = not_applicable(sufficient_id, "cocycles are not all Hermitian");
    return out;
  }
  const auto& action = family.action();
  const auto& phi = flow.state();
  const Index n = flow.dim();
  const auto units = matrix_units(n);
  DeviationTracker state_tr;
  DeviationTracker map_tr;
  for (double t : flow.sample_times()) {
    for (Index k = 0; k < n * n; ++k) {
      const Matrix& a = units[static_cast<std::size_t>(k)];
      const Matrix ea = mean_over_group(action, a);
      const Matrix sigma_ea = flow.apply(ea, t);
      const Matrix e_sigma_a = mean_over_group(action, flow.apply(a, t));
      const cplx base = phi.evaluate(ea);
      observe_equal(state_tr, phi.evaluate(sigma_ea), base, tol,
                    at({}, t, "phi sigma E " + unit_label(n, k)));
      observe_equal(state_tr, phi.evaluate(e_sigma_a), base, tol,
                    at({}, t, "phi E sigma " + unit_label(n, k)));
      observe_equal(map_tr, sigma_ea, e_sigma_a, tol, at({}, t, unit_label(n, k)));
    }
  }
  out.state_level = state_tr.finish(state_id, Hypothesis::satisfied);

  auto gated = [&](const char* id, bool premise, const char* why) {
    if (premise) return map_tr.finish(id, Hypothesis::satisfied);
    Verdict v = not_applicable(id, why);
    v.max_deviation = map_tr.max_deviation();
    return v;
  };
  out.map_level = gated(map_id, commutation.commute, "flow does not commute with G");

  const AlgebraBasis fixed = fixed_point_algebra(action, tol);
  const bool centr_in_fixed = span_contains(fixed, centralizer(phi, tol), tol).contained;
  out.sufficient_condition = gated(sufficient_id, commutation.central_cocycles || centr_in_fixed,
                                   "neither C in Z nor Centr(phi) in F(G)");
  return out;
}

Verdict check_inclusion(const ModularFlow& flow, const CocycleFamily& family,
                        const FlowGroupCommutation& commutation, const Tolerance& tol) {
  const char* id = "flow.inclusion";
  if (!family.strongly_quasi() || !commutation.commute) {
    return not_applicable(id, "flow does not commute with G");
  }
  const auto& action = family.action();
  const AlgebraBasis centr = centralizer(flow.state(), tol);
  const AlgebraBasis fixed = fixed_point_algebra(action, tol);
  DeviationTracker tr;
  for (const auto& c : centr.basis()) {
    tr.observe(centr.residual(mean_over_group(action, c)), tol.threshold(1.0, 1.0),
               at({}, {}, "E_G(Centr) in Centr"));
  }
  for (double t : flow.sample_times()) {
    for (const auto& f : fixed.basis()) {
      tr.observe(fixed.residual(flow.apply(f, t)), tol.threshold(1.0, 1.0),
                 at({}, t, "sigma_t(F(G)) in F(G)"));
    }
  }
  return tr.finish(id, Hypothesis::satisfied);
}

Verdict check_ergodic_coincidence(const ModularFlow& flow, const CocycleFamily& family,
                                  const Tolerance& tol) {
  const char* id = "flow.ergodic_coincidence";
  if (family.classification() != InvarianceClass::invariant) {
    return not_applicable(id, "state is not G-invariant");
  }
  const auto& action = family.action();
  const AlgebraBasis fixed = fixed_point_algebra(action, tol);
  const AlgebraBasis centr = centralizer(flow.state(), tol);
  if (!span_contains(fixed, centr, tol).contained) {
    return not_applicable(id, "Centr(phi) is not contained in F(G)");
  }
  const Index n = flow.dim();
  const auto units = matrix_units(n);
  DeviationTracker tr;
  for (Index k = 0; k < n * n; ++k) {
    const Matrix& x = units[static_cast<std::size_t>(k)];
    observe_equal(tr, mean_over_group(action, x), modular_invariant_expectation(flow, x), tol,
                  at({}, {}, unit_label(n, k)));
  }
  // The two maps are projections onto F(G) and Centr(phi), so they can only
  // agree when the containment is an equality.
  std::string note;
  if (fixed.dimension() != centr.dimension()) {
    note = "F(G) has dimension " + std::to_string(fixed.dimension()) + ", Centr(phi) has " +
           std::to_string(centr.dimension());
  }
  return tr.finish(id, Hypothesis::satisfied, note);
}

InvarianceEquivalence check_invariance_equivalence(const ModularFlow& flow,
                                                   const CocycleFamily& family,
                                                   const FlowGroupCommutation& commutation,
                                                   const Tolerance& tol) {
  const auto& action = family.action();
  const auto& phi = flow.state();
  const Index n = flow.dim();
  InvarianceEquivalence out;

  DeviationTracker direct;
  for (const auto& a : matrix_units(n)) {
    for (std::size_t g = 0; g < action.order(); ++g) {
      observe_equal(direct, phi.evaluate(action.apply(g, a)), phi.evaluate(a), tol, at(g, {}, ""));
    }
  }
  out.invariant = !direct.violated();

  const AlgebraBasis fixed = fixed_point_algebra(action, tol);
  const bool cocycles_fixed = all_in(fixed, family.cocycles(), tol);
  out.strong_and_fixed =
      family.strongly_quasi() &&
      span_contains(fixed, cocycle_algebra(family, tol), tol).contained;
  out.commuting_and_fixed = commutation.commute && cocycles_fixed;

  const bool agree = out.invariant == out.strong_and_fixed && out.invariant == out.commuting_and_fixed;
  out.verdict = boolean_verdict(
      "qi.theorem.invariance_equivalence", agree,
      std::string("invariant=") + (out.invariant ? "true" : "false") +
          " strong_and_C_in_F=" + (out.strong_and_fixed ? "true" : "false") +
          " commuting_and_x_in_F=" + (out.commuting_and_fixed ? "true" : "false"));
  out.verdict.max_deviation = direct.max_deviation();
  return out;
}

}  // namespace quasi
