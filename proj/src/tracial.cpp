#include "quasi/tracial.hpp"

#include <cstdio>
#include <string>

#include "quasi/errors.hpp"

namespace quasi {

namespace {

Witness where(std::optional<std::size_t> g, std::string location) {
  return Witness{g, std::nullopt, std::move(location)};
}

std::string format_residual(double r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", r);
  return buf;
}

}  // namespace

ErgodicityGate ergodicity_on_center(const GroupAction& action, const Tolerance& tol) {
  const AlgebraBasis fixed = fixed_point_algebra(action, tol);
  const AlgebraBasis z = center(full_algebra(action.dim()), tol);
  ErgodicityGate out;
  out.intersection_dim = intersection(fixed, z, tol).dimension();
  out.ergodic = out.intersection_dim == 1;
  return out;
}

Verdict mean_density_checks(const FaithfulState& state, const CocycleFamily& family,
                            const Tolerance& tol) {
  const char* id = "tracial.mean_density";
  if (!family.strongly_quasi()) return not_applicable(id, "cocycles are not Hermitian");
  const auto gate = ergodicity_on_center(family.action(), tol);
  if (!gate.ergodic) {
    return not_applicable(id, "F(G) meets the center in dimension " +
                                  std::to_string(gate.intersection_dim));
  }
  DeviationTracker tr;
  const Matrix k = kappa(family);
  const Matrix& rho = state.density();
  const double scale = max_entry_norm(k);
  tr.observe(hermitian_deviation(k), tol.threshold(scale, scale), where({}, "kappa Hermitian"));
  const auto spectrum = hermitian_eigen((k + k.adjoint()) / 2.0, tol);
  const double lowest = spectrum.values.minCoeff();
  tr.observe(lowest > 0.0 ? 0.0 : -lowest, tol.threshold(scale, 0.0),
             where({}, "kappa positive definite"));
  observe_equal(tr, Matrix(k * rho), Matrix(rho * k), tol, where({}, "kappa in Centr(phi)"));

  const Index n = state.dim();
  const auto units = matrix_units(n);
  cplx total = 0.0;
  for (Index i = 0; i < n; ++i) total += state.evaluate(Matrix(k * matrix_unit(n, i, i)));
  observe_equal(tr, total, cplx(1.0), tol, where({}, "phi_G(1) = 1"));
  const Matrix density = rho * k;
  tr.observe(hermitian_deviation(density), tol.threshold(1.0, 1.0), where({}, "phi_G Hermitian"));
  const double lowest_density = hermitian_eigen((density + density.adjoint()) / 2.0, tol).values.minCoeff();
  tr.observe(lowest_density > 0.0 ? 0.0 : -lowest_density, tol.threshold(1.0, 0.0),
             where({}, "phi_G positive"));
  for (std::size_t g = 0; g < family.action().order(); ++g) {
    for (Index u = 0; u < n * n; ++u) {
      const Matrix& a = units[static_cast<std::size_t>(u)];
      observe_equal(tr, state.evaluate(Matrix(k * family.action().apply(g, a))),
                    state.evaluate(Matrix(k * a)), tol, where(g, "phi_G(g(a)) = phi_G(a)"));
    }
  }
  return tr.finish(id, Hypothesis::satisfied);
}

TracialDecomposition tracial_decomposition(const FaithfulState& state, const CocycleFamily& family,
                                           const Tolerance& tol) {
  if (!family.strongly_quasi()) {
    throw NotStronglyQuasiInvariant("tracial decomposition needs Hermitian cocycles");
  }
  const auto gate = ergodicity_on_center(family.action(), tol);
  if (!gate.ergodic) {
    throw ErgodicityHypothesisFailed("F(G) meets the center in dimension " +
                                     std::to_string(gate.intersection_dim));
  }
  const Index n = state.dim();
  const Matrix k = kappa(family);
  TracialDecomposition out;
  out.trace_density = identity(n);
  const Matrix b = k * state.density();
  out.b = (b + b.adjoint()) / 2.0;
  const Matrix c = out.b * k.inverse();
  out.c = (c + c.adjoint()) / 2.0;
  out.c_in_FG_residual = fixed_point_algebra(family.action(), tol).residual(out.c);
  return out;
}

double reconstruction_deviation(const FaithfulState& state, const TracialDecomposition& d) {
  double worst = 0.0;
  for (const auto& a : matrix_units(state.dim())) {
    worst = std::max(worst, std::abs(state.evaluate(a) - (d.c * a).trace()));
  }
  return worst;
}

Verdict check_tracial_decomposition(const FaithfulState& state, const CocycleFamily& family,
                                    const TracialDecomposition& d, const Tolerance& tol) {
  DeviationTracker tr;
  const Index n = state.dim();
  const auto units = matrix_units(n);
  const auto tau = [&](const Matrix& a) { return cplx((d.trace_density * a).trace()); };
  for (const auto& a : units) {
    for (const auto& b : units) {
      observe_equal(tr, tau(Matrix(a * b)), tau(Matrix(b * a)), tol, where({}, "tau(ab) = tau(ba)"));
    }
    for (std::size_t g = 0; g < family.action().order(); ++g) {
      observe_equal(tr, tau(family.action().apply(g, a)), tau(a), tol,
                    where(g, "tau(g(a)) = tau(a)"));
    }
    observe_equal(tr, state.evaluate(a), tau(Matrix(d.c * a)), tol, where({}, "phi(a) = tau(c a)"));
  }
  const AlgebraBasis fixed = fixed_point_algebra(family.action(), tol);
  tr.observe(fixed.residual(d.b), tol.threshold(max_entry_norm(d.b), 1.0), where({}, "b in F(G)"));
  const Matrix k_inv = kappa(family).inverse();
  observe_equal(tr, Matrix(d.b * k_inv), Matrix(k_inv * d.b), tol, where({}, "[b, kappa^-1] = 0"));
  return tr.finish("tracial.decomposition", Hypothesis::satisfied,
                   "c_in_FG_residual=" + format_residual(d.c_in_FG_residual));
}

}  // namespace quasi
