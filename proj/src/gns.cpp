#include "quasi/gns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "quasi/errors.hpp"

namespace quasi {

namespace {

std::string unit_label(Index n, Index k) {
  return "E_" + std::to_string(k / n) + std::to_string(k % n);
}

Witness at(std::optional<std::size_t> g, std::string location) {
  return Witness{g, std::nullopt, std::move(location)};
}

/// E_{k,k+1} and E_{k+1,k}: they generate M_n as an algebra, so commuting
/// with all of them is commuting with M_n.
std::vector<Matrix> generators(Index n) {
  std::vector<Matrix> out;
  if (n == 1) out.push_back(identity(1));
  for (Index k = 0; k + 1 < n; ++k) {
    out.push_back(matrix_unit(n, k, k + 1));
    out.push_back(matrix_unit(n, k + 1, k));
  }
  return out;
}

/// Antilinear map from its values on the (real) standard basis.
Antilinear antilinear_from_columns(Index dim, const auto& value_of_basis_vector) {
  Matrix m(dim, dim);
  for (Index k = 0; k < dim; ++k) m.col(k) = value_of_basis_vector(k);
  return {m};
}

Matrix jpj(const GnsSystem& gns, const Matrix& a) {
  return compose(compose(gns.j(), gns.pi(a)), gns.j());
}

/// Orthonormal basis of the range of an orthogonal projection.
Matrix range_basis(const Matrix& p) {
  const auto spectrum = hermitian_eigen((p + p.adjoint()) / 2.0, Tolerance(1e-6, 0.0));
  Index first = 0;
  while (first < spectrum.values.size() && spectrum.values(first) < 0.5) ++first;
  return spectrum.vectors.rightCols(spectrum.values.size() - first);
}

/// Commutant of `elements` inside M_r, via the null space of the Hermitian
/// Gram operator sum_i K_i^* K_i with K_i x = x c_i - c_i x. Each Gram term
/// is a sum of Kronecker products, which keeps this cheap for r in the tens.
std::vector<Matrix> commutant_by_gram(const std::vector<Matrix>& elements, Index r,
                                      const Tolerance& tol) {
  if (r == 0) return {};
  const Index r2 = r * r;
  Matrix gram = Matrix::Zero(r2, r2);
  const Matrix id = identity(r);
  for (const auto& e : elements) {
    const double scale = hs_norm(e);
    if (scale == 0.0) continue;
    const Matrix c = e / scale;
    // K = c^T kron I - I kron c.
    const Matrix ct = c.transpose();
    const Matrix cc = c.conjugate();
    gram += kron(Matrix(cc * ct), id) + kron(id, Matrix(c.adjoint() * c)) - kron(cc, c) -
            kron(ct, Matrix(c.adjoint()));
  }
  const auto spectrum = hermitian_eigen((gram + gram.adjoint()) / 2.0, Tolerance(1.0, 0.0));
  // Eigenvalues are squared singular values of the stacked system.
  const double threshold = std::max(tol.abs(), 1e-12) * static_cast<double>(elements.size());
  std::vector<Matrix> out;
  for (Index k = 0; k < r2; ++k) {
    if (spectrum.values(k) > threshold) break;
    out.push_back(unvec(spectrum.vectors.col(k), r));
  }
  return out;
}

AbelianReport compressed_report(const std::vector<Matrix>& elements, const Matrix& basis,
                                const Tolerance& tol) {
  const Index r = basis.cols();
  std::vector<Matrix> compressed;
  compressed.reserve(elements.size());
  for (const auto& e : elements) compressed.push_back(basis.adjoint() * e * basis);
  return is_abelian(span_of(r, compressed, tol), tol);
}

}  // namespace

GnsSystem::GnsSystem(const FaithfulState& state, const Tolerance& tol) : state_(state) {
  const Index n = state_.dim();
  const Index d = n * n;
  rho_sqrt_ = state_.power(0.5);
  rho_inv_sqrt_ = state_.power(-0.5);
  omega_ = vec(rho_sqrt_);

  // S xi(a) = xi(a^dagger): X = a rho^{1/2} goes to rho^{-1/2} X^dagger rho^{1/2}.
  s_ = antilinear_from_columns(d, [&](Index k) {
    const Matrix x = unvec(Vector::Unit(d, k), n);
    return vec(rho_inv_sqrt_ * x.adjoint() * rho_sqrt_);
  });
  // J X = X^dagger exactly; taking it from the polar part of S costs cond(Delta) * eps.
  j_ = antilinear_from_columns(d, [&](Index k) {
    return vec(Matrix(unvec(Vector::Unit(d, k), n).adjoint()));
  });
  delta_ = polar_decomposition(s_, tol).delta;
  delta_spectrum_ = hermitian_eigen(delta_, tol);

  // F (J pi(a) J Omega) = J pi(a^dagger) J Omega: Y = rho^{1/2} a^dagger goes to rho^{1/2} Y^dagger rho^{-1/2}.
  f_ = antilinear_from_columns(d, [&](Index k) {
    const Matrix y = unvec(Vector::Unit(d, k), n);
    return vec(rho_sqrt_ * y.adjoint() * rho_inv_sqrt_);
  });
}

Vector GnsSystem::vector_of(const Matrix& a) const {
  if (a.rows() != base_dim() || a.cols() != base_dim()) throw DimensionMismatch("GNS vector");
  return vec(a * rho_sqrt_);
}

Matrix GnsSystem::pi(const Matrix& a) const {
  if (a.rows() != base_dim() || a.cols() != base_dim()) throw DimensionMismatch("GNS pi");
  return kron(identity(base_dim()), a);
}

Matrix GnsSystem::commutant_pi(const Matrix& a) const {
  if (a.rows() != base_dim() || a.cols() != base_dim()) throw DimensionMismatch("GNS J pi J");
  // vec(X a^dagger) = (conj(a) kron I) vec(X).
  return kron(a.conjugate(), identity(base_dim()));
}

GnsSystem build_gns(const FaithfulState& state, const Tolerance& tol) { return GnsSystem(state, tol); }

Verdict check_gns_system(const GnsSystem& gns, const Tolerance& tol) {
  DeviationTracker tr;
  const Index n = gns.base_dim();
  const Index d = gns.space_dim();
  const Vector& omega = gns.omega();
  const auto units = matrix_units(n);
  for (Index k = 0; k < n * n; ++k) {
    const Matrix& a = units[static_cast<std::size_t>(k)];
    observe_equal(tr, omega.dot(gns.pi(a) * omega), gns.state().evaluate(a), tol,
                  at({}, "<Omega, pi(a) Omega> " + unit_label(n, k)));
    observe_equal(tr, Matrix(gns.s().apply(gns.pi(a) * omega)),
                  Matrix(gns.pi(Matrix(a.adjoint())) * omega), tol,
                  at({}, "S pi(a) Omega " + unit_label(n, k)));
  }
  observe_equal(tr, gns.s().m, compose(gns.j(), gns.delta_power(0.5)).m, tol,
                at({}, "S = J Delta^1/2"));
  observe_equal(tr, compose(gns.s(), gns.delta_power(-0.5)).m, gns.j().m, tol,
                at({}, "J = S Delta^-1/2"));
  observe_equal(tr, compose(gns.j(), gns.j()), identity(d), tol, at({}, "J^2 = 1"));
  observe_equal(tr, Matrix(gns.j().apply(omega)), Matrix(omega), tol, at({}, "J Omega = Omega"));
  tr.observe(unitary_deviation(gns.j().m), tol.threshold(1.0, 1.0), at({}, "J antiunitary"));
  observe_equal(tr, compose(gns.f(), gns.s()), gns.delta(), tol, at({}, "Delta = F S"));
  observe_equal(tr, gns.f().m, adjoint(gns.s()).m, tol, at({}, "F = S*"));
  const auto gens = generators(n);
  for (const auto& a : gens) {
    const Matrix right = jpj(gns, a);
    observe_equal(tr, right, gns.commutant_pi(a), tol, at({}, "J pi(a) J = right action"));
    for (const auto& b : gens) {
      const Matrix pb = gns.pi(b);
      observe_equal(tr, Matrix(right * pb), Matrix(pb * right), tol,
                    at({}, "J pi(a) J commutes with pi(b)"));
    }
  }
  return tr.finish("gns.system");
}

Verdict check_delta_closed_form(const GnsSystem& gns, const std::vector<double>& times,
                                const Tolerance& tol) {
  DeviationTracker tr;
  const FaithfulState& phi = gns.state();
  const Index n = gns.base_dim();
  const Matrix rho = phi.density();
  const Matrix closed = kron(Matrix(phi.power(-1.0).transpose()), rho);
  observe_equal(tr, gns.delta(), closed, tol, at({}, "Delta = (rho^-1)^T kron rho"));
  // J X = X^dagger in these coordinates: the transpose permutation.
  Matrix swap = Matrix::Zero(n * n, n * n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) swap(j + i * n, i + j * n) = 1.0;
  }
  observe_equal(tr, gns.j().m, swap, tol, at({}, "J = transpose"));
  for (double t : times) {
    const Matrix d_it = gns.delta_power(cplx(0.0, t));
    const Matrix r_it = phi.power(cplx(0.0, t));
    for (const auto& a : generators(n)) {
      observe_equal(tr, Matrix(d_it * gns.pi(a) * d_it.adjoint()),
                    gns.pi(Matrix(r_it * a * r_it.adjoint())), tol,
                    Witness{std::nullopt, t, "Delta^it pi(a) Delta^-it = pi(sigma_t(a))"});
    }
  }
  return tr.finish("gns.delta_closed_form");
}

GnsShift shift_for(const GnsSystem& gns, const CocycleFamily& family, std::size_t g,
                   const Tolerance& tol) {
  if (!family.strongly_quasi()) {
    throw NotStronglyQuasiInvariant("GNS shifts need Hermitian cocycles");
  }
  const auto& action = family.action();
  if (action.dim() != gns.base_dim()) throw DimensionMismatch("GNS and action dimensions differ");
  if (g >= action.order()) throw InvalidParams("group element out of range");
  const Index n = gns.base_dim();
  const Index d = gns.space_dim();
  const FaithfulState& phi = gns.state();

  GnsShift out;
  out.g = g;
  const Matrix& xg = family.cocycle(g);
  const auto spectrum = hermitian_eigen((xg + xg.adjoint()) / 2.0, tol);
  out.sqrt_x = hermitian_power(spectrum, 0.5);
  out.inv_sqrt_x = hermitian_power(spectrum, -0.5);
  out.omega_g = gns.pi(out.sqrt_x) * gns.omega();

  // U_g xi(a) = xi(g(a) x_{g^-1}^{1/2}).
  const Matrix& x_inv_elem = family.cocycle(action.group().inverse(g));
  const Matrix y = hermitian_power((x_inv_elem + x_inv_elem.adjoint()) / 2.0, 0.5, tol);
  const Matrix rho_sqrt = phi.power(0.5);
  const Matrix rho_inv_sqrt = phi.power(-0.5);
  out.u.resize(d, d);
  for (Index k = 0; k < d; ++k) {
    const Matrix a = unvec(Vector::Unit(d, k), n) * rho_inv_sqrt;
    out.u.col(k) = vec(action.apply(g, a) * y * rho_sqrt);
  }
  out.v = compose(compose(gns.j(), out.u), gns.j());

  // omega_g = vec(W), W = x^1/2 rho^1/2. S_g (aW) = a^dagger W and F_g (W a^dagger) = W a,
  // written out directly; solving for them from their action on matrix units
  // loses accuracy when rho is poorly conditioned.
  const Matrix w = out.sqrt_x * rho_sqrt;
  const Matrix w_inv = rho_inv_sqrt * out.inv_sqrt_x;
  const Matrix w_inv_adj = w_inv.adjoint();
  out.s = antilinear_from_columns(d, [&](Index k) {
    const Matrix x = unvec(Vector::Unit(d, k), n);
    return vec(w_inv_adj * x.adjoint() * w);
  });
  out.f = antilinear_from_columns(d, [&](Index k) {
    const Matrix x = unvec(Vector::Unit(d, k), n);
    return vec(w * x.adjoint() * w_inv_adj);
  });
  const auto polar = polar_decomposition(out.s, tol);
  out.j = polar.j;
  out.delta = polar.delta;
  return out;
}

std::vector<GnsShift> shifts_for(const GnsSystem& gns, const CocycleFamily& family,
                                 const Tolerance& tol) {
  std::vector<GnsShift> out;
  out.reserve(family.action().order());
  for (std::size_t g = 0; g < family.action().order(); ++g) {
    out.push_back(shift_for(gns, family, g, tol));
  }
  return out;
}

Verdict check_shift_state(const GnsSystem& gns, const CocycleFamily& family,
                          const std::vector<GnsShift>& shifts, const Tolerance& tol) {
  DeviationTracker tr;
  const Index n = gns.base_dim();
  const auto units = matrix_units(n);
  for (const auto& sh : shifts) {
    for (Index k = 0; k < n * n; ++k) {
      const Matrix& a = units[static_cast<std::size_t>(k)];
      observe_equal(tr, sh.omega_g.dot(gns.pi(a) * sh.omega_g),
                    gns.state().evaluate(family.action().apply(sh.g, a)), tol,
                    at(sh.g, unit_label(n, k)));
    }
  }
  return tr.finish("gns.shift.state");
}

Verdict check_shift_cone(const GnsSystem& gns, const std::vector<GnsShift>& shifts,
                         const Tolerance& tol) {
  DeviationTracker tr;
  const Matrix quarter = gns.delta_power(0.25);
  for (const auto& sh : shifts) {
    const Matrix p = gns.pi(sh.sqrt_x);
    observe_equal(tr, Matrix(p * gns.delta()), Matrix(gns.delta() * p), tol,
                  at(sh.g, "[pi(sqrt x_g), Delta] = 0"));
    observe_equal(tr, Matrix(sh.omega_g), Matrix(quarter * p * gns.omega()), tol,
                  at(sh.g, "Omega_g = Delta^1/4 pi(sqrt x_g) Omega"));
  }
  return tr.finish("gns.shift.cone");
}

Verdict check_shift_j(const GnsSystem& gns, const std::vector<GnsShift>& shifts,
                      const Tolerance& tol) {
  DeviationTracker tr;
  for (const auto& sh : shifts) {
    observe_equal(tr, sh.j.m, gns.j().m, tol, at(sh.g, "J_g = J"));
    observe_equal(tr, Matrix(gns.j().apply(sh.omega_g)), Matrix(sh.omega_g), tol,
                  at(sh.g, "J Omega_g = Omega_g"));
  }
  return tr.finish("gns.shift.j_equality");
}

Verdict check_shift_unitaries(const GnsSystem& gns, const CocycleFamily& family,
                              const std::vector<GnsShift>& shifts, const Tolerance& tol) {
  DeviationTracker tr;
  const auto& group = family.action().group();
  const Index d = gns.space_dim();
  const double unit_threshold = tol.threshold(1.0, 1.0);
  for (const auto& sh : shifts) {
    tr.observe(unitary_deviation(sh.u), unit_threshold, at(sh.g, "U_g unitary"));
    tr.observe(unitary_deviation(sh.v), unit_threshold, at(sh.g, "V_g unitary"));
    observe_equal(tr, sh.u.adjoint(), shifts[group.inverse(sh.g)].u, tol,
                  at(sh.g, "U_g^* = U_{g^-1}"));
    for (const auto& other : shifts) {
      observe_equal(tr, Matrix(sh.u * other.u), shifts[group.multiply(sh.g, other.g)].u, tol,
                    at(sh.g, "U_g U_h = U_gh with h=" + std::to_string(other.g)));
    }
  }
  observe_equal(tr, shifts[group.identity()].u, identity(d), tol, at(group.identity(), "U_e = 1"));
  observe_equal(tr, Matrix(shifts[group.identity()].omega_g), Matrix(gns.omega()), tol,
                at(group.identity(), "Omega_e = Omega"));
  return tr.finish("gns.shift.unitaries");
}

Verdict check_covariance(const GnsSystem& gns, const CocycleFamily& family,
                         const std::vector<GnsShift>& shifts, const Tolerance& tol) {
  DeviationTracker tr;
  const Index n = gns.base_dim();
  const auto units = matrix_units(n);
  for (const auto& sh : shifts) {
    for (Index k = 0; k < n * n; ++k) {
      const Matrix& a = units[static_cast<std::size_t>(k)];
      const Matrix ga = family.action().apply(sh.g, a);
      observe_equal(tr, Matrix(sh.u * gns.pi(a) * sh.u.adjoint()), gns.pi(ga), tol,
                    at(sh.g, "U_g pi(a) U_g^* " + unit_label(n, k)));
      observe_equal(tr, Matrix(sh.v * jpj(gns, a) * sh.v.adjoint()), jpj(gns, ga), tol,
                    at(sh.g, "V_g J pi(a) J V_g^* " + unit_label(n, k)));
    }
  }
  return tr.finish("gns.covariance");
}

std::vector<Verdict> check_modular_relations(const GnsSystem& gns,
                                             const std::vector<GnsShift>& shifts,
                                             const Tolerance& tol) {
  DeviationTracker s_exchange;
  DeviationTracker f_exchange;
  DeviationTracker factorisation;
  DeviationTracker s_formula;
  DeviationTracker delta_formula;
  DeviationTracker us_formula;
  const Matrix delta_half = gns.delta_power(0.5);
  for (const auto& sh : shifts) {
    const Matrix& u = sh.u;
    const Matrix& v = sh.v;
    observe_equal(s_exchange, compose(gns.s(), u).m, compose(u, sh.s).m, tol,
                  at(sh.g, "S U_g = U_g S_g"));
    observe_equal(f_exchange, compose(gns.f(), v).m, compose(v, sh.f).m, tol,
                  at(sh.g, "F V_g = V_g F_g"));

    const Matrix fs = compose(sh.f, sh.s);
    const Antilinear v_f_v = compose(Matrix(v.adjoint()), compose(gns.f(), v));
    const Antilinear u_s_u = compose(Matrix(u.adjoint()), compose(gns.s(), u));
    observe_equal(factorisation, sh.delta, fs, tol, at(sh.g, "Delta_g = F_g S_g"));
    observe_equal(factorisation, fs, compose(v_f_v, u_s_u), tol,
                  at(sh.g, "F_g S_g = (V_g^* F V_g)(U_g^* S U_g)"));

    // (i) S_g = pi(x^-1/2) J pi(x^1/2) J S
    const Matrix left_i = gns.pi(sh.inv_sqrt_x) * jpj(gns, sh.sqrt_x);
    observe_equal(s_formula, sh.s.m, compose(left_i, gns.s()).m, tol, at(sh.g, "S_g formula"));

    // (ii) Delta_g^1/2 = pi(x^1/2) J pi(x^-1/2) J Delta^1/2
    const Matrix left_ii = gns.pi(sh.sqrt_x) * jpj(gns, sh.inv_sqrt_x);
    const Matrix delta_g_half = hermitian_power(sh.delta, 0.5, tol);
    observe_equal(delta_formula, delta_g_half, Matrix(left_ii * delta_half), tol,
                  at(sh.g, "Delta_g^1/2 formula"));

    // (iii) U_g S_g = pi(x^1/2) J pi(x^-1/2) J S_g U_g = S U_g
    const Matrix lhs = compose(u, sh.s).m;
    observe_equal(us_formula, lhs, compose(left_ii, compose(sh.s, u)).m, tol,
                  at(sh.g, "U_g S_g = pi J pi J S_g U_g"));
    observe_equal(us_formula, lhs, compose(gns.s(), u).m, tol, at(sh.g, "U_g S_g = S U_g"));
  }
  return {s_exchange.finish("gns.relation.s_exchange"),
          f_exchange.finish("gns.relation.f_exchange"),
          factorisation.finish("gns.relation.delta_factorization"),
          s_formula.finish("gns.relation.s_g_formula"),
          delta_formula.finish("gns.relation.delta_g_sqrt_formula"),
          us_formula.finish("gns.relation.u_s_g_formula")};
}

Matrix projection_over(const std::vector<GnsShift>& shifts, const std::vector<std::size_t>& elements) {
  if (shifts.empty() || elements.empty()) throw InvalidParams("projection over an empty set");
  Matrix p = Matrix::Zero(shifts.front().u.rows(), shifts.front().u.cols());
  for (std::size_t g : elements) p += shifts.at(g).u;
  return p / static_cast<double>(elements.size());
}

Matrix projection_pg(const std::vector<GnsShift>& shifts) {
  std::vector<std::size_t> all(shifts.size());
  for (std::size_t g = 0; g < all.size(); ++g) all[g] = g;
  return projection_over(shifts, all);
}

Verdict check_projection(const std::vector<GnsShift>& shifts, const Matrix& pg,
                         const Tolerance& tol) {
  DeviationTracker tr;
  const Index d = pg.rows();
  observe_equal(tr, Matrix(pg * pg), pg, tol, at({}, "P_G^2 = P_G"));
  observe_equal(tr, Matrix(pg.adjoint()), pg, tol, at({}, "P_G^* = P_G"));
  Matrix gram = Matrix::Zero(d, d);
  for (const auto& sh : shifts) {
    observe_equal(tr, Matrix(pg * sh.u), pg, tol, at(sh.g, "P_G U_g = P_G"));
    observe_equal(tr, Matrix(sh.u * pg), pg, tol, at(sh.g, "U_g P_G = P_G"));
    const Matrix diff = sh.u - identity(d);
    gram += diff.adjoint() * diff;
  }
  const Matrix range = range_basis(pg);
  for (const auto& sh : shifts) {
    observe_equal(tr, Matrix(sh.u * range), range, tol, at(sh.g, "range vectors U_g-fixed"));
  }
  const double trace = pg.trace().real();
  const Index rank = static_cast<Index>(std::llround(trace));
  const Index fixed_dim =
      null_space(gram, rank_threshold(d, tol) * static_cast<double>(shifts.size())).cols();
  tr.observe(std::abs(trace - static_cast<double>(rank)), tol.threshold(1.0, 1.0),
             at({}, "Tr P_G is an integer"));
  tr.observe(static_cast<double>(std::abs(rank - fixed_dim)), 0.5,
             at({}, "rank " + std::to_string(rank) + " vs fixed space " + std::to_string(fixed_dim)));
  tr.observe(static_cast<double>(std::abs(range.cols() - rank)), 0.5, at({}, "range basis size"));
  return tr.finish("gns.projection");
}

Matrix lifted_expectation(const std::vector<GnsShift>& shifts, const Matrix& pi_a) {
  Matrix out = Matrix::Zero(pi_a.rows(), pi_a.cols());
  for (const auto& sh : shifts) out += sh.u * pi_a * sh.u.adjoint();
  return out / static_cast<double>(shifts.size());
}

std::vector<Verdict> check_lifted_expectation(const GnsSystem& gns, const CocycleFamily& family,
                                              const std::vector<GnsShift>& shifts,
                                              const Matrix& pg, const Tolerance& tol) {
  DeviationTracker block1;
  DeviationTracker block2;
  DeviationTracker invariance;
  const Index n = gns.base_dim();
  const Index d = gns.space_dim();
  const Matrix perp = identity(d) - pg;
  const Matrix zero = Matrix::Zero(d, d);
  const auto units = matrix_units(n);
  for (Index k = 0; k < n * n; ++k) {
    const Matrix& a = units[static_cast<std::size_t>(k)];
    const std::string label = unit_label(n, k);
    const Matrix pa = gns.pi(a);
    const Matrix e = lifted_expectation(shifts, pa);
    const Matrix pap = pg * pa * pg;
    const Matrix ep = e * pg;
    const Matrix pe = pg * e;
    observe_equal(block1, pap, ep, tol, at({}, "P pi(a) P = E P " + label));
    observe_equal(block1, ep, pe, tol, at({}, "E P = P E " + label));
    observe_equal(block1, pe, Matrix(pe * pg), tol, at({}, "P E = P E P " + label));
    observe_equal(block2, Matrix(perp * ep), zero, tol, at({}, "P^perp E P = 0 " + label));
    observe_equal(block2, Matrix(pe * perp), zero, tol, at({}, "P E P^perp = 0 " + label));
    observe_equal(invariance, e, gns.pi(mean_over_group(family.action(), a)), tol,
                  at({}, "E~(pi(a)) = pi(E_G(a)) " + label));
    for (const auto& sh : shifts) {
      observe_equal(invariance, Matrix(sh.u * e * sh.u.adjoint()), e, tol,
                    at(sh.g, "u_g invariance " + label));
    }
  }
  return {block1.finish("gns.lifted_expectation.block1"),
          block2.finish("gns.lifted_expectation.block2"),
          invariance.finish("gns.lifted_expectation.invariance")};
}

CompressedAbelianness compressed_abelianness(const GnsSystem& gns, const CocycleFamily& family,
                                             const std::vector<GnsShift>& shifts,
                                             const Matrix& pg, AbelianRoute route,
                                             const Tolerance& tol) {
  constexpr Index kDirectLimit = 9;
  const Index n = gns.base_dim();
  const Index d = gns.space_dim();
  const Matrix basis = range_basis(pg);
  const Index r = basis.cols();
  CompressedAbelianness out;
  if (route == AbelianRoute::automatic) {
    route = d <= kDirectLimit ? AbelianRoute::direct : AbelianRoute::duality;
  }

  // Fix(u_G) = pi(F(G)), generated by the lifted expectations of matrix units.
  std::vector<Matrix> means;
  for (const auto& e : matrix_units(n)) means.push_back(mean_over_group(family.action(), e));
  const AlgebraBasis fixed = generate_algebra(means, n, tol);
  std::vector<Matrix> fix_lifted;
  for (const auto& f : fixed.basis()) fix_lifted.push_back(gns.pi(f));
  const auto rhs = compressed_report(fix_lifted, basis, tol);
  out.rhs = rhs.abelian;
  out.rhs_commutator = rhs.worst_commutator;

  if (route == AbelianRoute::direct) {
    out.route = "direct";
    std::vector<Matrix> seeds;
    for (const auto& e : matrix_units(n)) seeds.push_back(gns.pi(e));
    for (const auto& sh : shifts) seeds.push_back(sh.u);
    const AlgebraBasis r_alg = generate_algebra(seeds, d, tol);
    const auto lhs = compressed_report(r_alg.basis(), basis, tol);
    out.lhs = lhs.abelian;
    out.lhs_commutator = lhs.worst_commutator;
  } else {
    out.route = "duality";
    // R' consists of right multiplications R_c = c^T kron I (the commutant of
    // pi(M_n)) that commute with every U_g. Solve for c in M_n.
    const Matrix id = identity(n);
    Matrix system(static_cast<Index>(shifts.size()) * d * d, n * n);
    for (Index k = 0; k < n * n; ++k) {
      const Matrix rc = kron(Matrix(unvec(Vector::Unit(n * n, k), n).transpose()), id);
      for (std::size_t s = 0; s < shifts.size(); ++s) {
        const Matrix& u = shifts[s].u;
        system.block(static_cast<Index>(s) * d * d, k, d * d, 1) = vec(Matrix(rc * u - u * rc));
      }
    }
    const Matrix kernel = null_space(system, rank_threshold(n, tol));
    std::vector<Matrix> commutant_compressed;
    for (Index k = 0; k < kernel.cols(); ++k) {
      const Matrix c = unvec(kernel.col(k), n);
      commutant_compressed.push_back(basis.adjoint() * kron(Matrix(c.transpose()), id) * basis);
    }
    // P R P on Ran P is the commutant of R' P there.
    const auto compressed = commutant_by_gram(commutant_compressed, r, tol);
    const auto lhs = is_abelian(span_of(std::max<Index>(r, 1), r == 0 ? std::vector<Matrix>{} : compressed, tol), tol);
    out.lhs = lhs.abelian;
    out.lhs_commutator = lhs.worst_commutator;
  }
  out.agree = out.lhs == out.rhs;
  out.verdict = boolean_verdict("gns.abelianness", out.agree,
                                std::string("lhs=") + (out.lhs ? "abelian" : "non-abelian") +
                                    " rhs=" + (out.rhs ? "abelian" : "non-abelian") +
                                    " route=" + out.route + " rank=" + std::to_string(r));
  out.verdict.max_deviation = std::max(out.lhs_commutator, out.rhs_commutator);
  return out;
}

ChainReport subgroup_chain_limit(const GnsSystem& gns, const CocycleFamily& family,
                                 const std::vector<GnsShift>& shifts,
                                 const std::vector<std::vector<std::size_t>>& chain,
                                 const Tolerance& tol) {
  const auto& group = family.action().group();
  if (chain.empty()) throw ChainNotNested("subgroup chain is empty");
  for (std::size_t k = 0; k < chain.size(); ++k) {
    if (!group.is_subgroup(chain[k])) {
      throw ChainNotNested("chain entry " + std::to_string(k) + " is not a subgroup");
    }
    if (k > 0) {
      for (std::size_t h : chain[k - 1]) {
        if (std::find(chain[k].begin(), chain[k].end(), h) == chain[k].end()) {
          throw ChainNotNested("chain entry " + std::to_string(k) + " does not contain its predecessor");
        }
      }
    }
  }
  if (chain.back().size() != group.order()) throw ChainNotNested("chain does not end at the group");

  ChainReport out;
  const Index n = gns.base_dim();
  const Matrix pg = projection_pg(shifts);
  const auto units = matrix_units(n);
  std::vector<Matrix> targets;
  for (const auto& a : units) targets.push_back(pg * gns.pi(a) * pg);

  std::vector<double> previous_hs(units.size(), std::numeric_limits<double>::infinity());
  Matrix previous_p;
  DeviationTracker tr;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const Matrix pn = projection_over(shifts, chain[k]);
    ChainStage stage;
    stage.order = chain[k].size();
    stage.rank = static_cast<Index>(std::llround(pn.trace().real()));
    if (k > 0) {
      const auto nested = approx_equal(Matrix(previous_p * pn), pn, tol);
      if (!nested.equal) out.nested = false;
      tr.observe(nested.deviation, nested.threshold,
                 Witness{std::nullopt, std::nullopt, "P_N P_N+1 = P_N+1 at stage " + std::to_string(k)});
    }
    for (std::size_t u = 0; u < units.size(); ++u) {
      Matrix e = Matrix::Zero(pn.rows(), pn.cols());
      const Matrix pa = gns.pi(units[u]);
      for (std::size_t h : chain[k]) e += shifts[h].u * pa * shifts[h].u.adjoint();
      e /= static_cast<double>(chain[k].size());
      const Matrix diff = e * pg - targets[u];
      stage.deviation = std::max(stage.deviation, max_entry_norm(diff));
      const double hs = hs_norm(diff);
      stage.hs_deviation = std::max(stage.hs_deviation, hs);
      if (hs > previous_hs[u] + tol.threshold(1.0, previous_hs[u])) out.monotone = false;
      previous_hs[u] = hs;
    }
    previous_p = pn;
    out.stages.push_back(stage);
  }
  const double final_threshold = tol.threshold(1.0, 1.0);
  out.final_exact = out.stages.back().deviation <= final_threshold;
  tr.observe(out.stages.back().deviation, final_threshold,
             Witness{std::nullopt, std::nullopt, "final stage E~_G(pi(a)) P_G = P_G pi(a) P_G"});
  tr.observe(out.monotone ? 0.0 : 1.0, 0.5,
             Witness{std::nullopt, std::nullopt, "HS deviation non-increasing along the chain"});
  out.verdict = tr.finish("gns.subgroup_chain");
  return out;
}

}  // namespace quasi
