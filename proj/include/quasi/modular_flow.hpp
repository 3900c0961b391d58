#pragma once

// The modular automorphism group sigma_t(a) = rho^{it} a rho^{-it} of a
// faithful state, the pinching onto its fixed algebra, and the checks that
// relate the flow to a group action.

#include <vector>

#include "quasi/algebra.hpp"
#include "quasi/quasi_invariance.hpp"
#include "quasi/verdict.hpp"

namespace quasi {

class ModularFlow {
 public:
  explicit ModularFlow(FaithfulState state, std::vector<double> sample_times = default_sample_times(),
                       double relative_gap = 1e-6);

  /// {0, +-0.37, +-1.0, +-2.5, pi}.
  static std::vector<double> default_sample_times();

  const FaithfulState& state() const { return state_; }
  Index dim() const { return state_.dim(); }
  const std::vector<double>& sample_times() const { return times_; }

  /// rho^{it}.
  Matrix unitary(double t) const { return state_.power(cplx(0.0, t)); }
  Matrix apply(const Matrix& a, double t) const;

  /// Projections onto the eigenspaces of rho (eigenvalues clustered).
  const std::vector<Matrix>& spectral_projections() const { return projections_; }

 private:
  FaithfulState state_;
  std::vector<double> times_;
  std::vector<Matrix> projections_;
};

/// sum_k P_k x P_k over the spectral projections of rho: the phi-preserving
/// conditional expectation onto Centr(phi).
Matrix modular_invariant_expectation(const ModularFlow& flow, const Matrix& x);

/// (1/2T) int_{-T}^{T} sigma_t(x) dt by the trapezoid rule on `nodes` points.
Matrix cesaro_flow_mean(const ModularFlow& flow, const Matrix& x, double horizon,
                        std::size_t nodes);

struct FlowGroupCommutation {
  bool commute = false;
  double max_deviation = 0.0;
  /// Every x_g is Hermitian and lies in the center of M_n (the scalars).
  bool central_cocycles = false;
  double central_residual = 0.0;
  Verdict verdict;
};

/// Evaluates (a) sigma_t g = g sigma_t on sampled t and matrix units, (b)
/// whether every cocycle is central, and reports whether (a) <=> (b).
FlowGroupCommutation check_flow_group_commutation(const ModularFlow& flow,
                                                  const CocycleFamily& family,
                                                  const Tolerance& tol = {});

Verdict check_flow_invariants(const ModularFlow& flow, const Tolerance& tol = {});

/// Pinching idempotent, phi-preserving, sigma-fixed, with range equal to Centr(phi).
Verdict check_pinching(const ModularFlow& flow, const Tolerance& tol = {});

/// sigma_t = kappa^{-it} sigma_t^G kappa^{it}, and phi is sigma^G-invariant.
Verdict check_kappa_twist(const ModularFlow& flow, const CocycleFamily& family,
                          const Tolerance& tol = {});

/// g^{-1}(sigma_t(a)) = x_g^{it} sigma_t(g^{-1}(a)) x_g^{-it}. Throws NotStronglyQuasiInvariant.
Verdict check_factor_cocycle_relation(const ModularFlow& flow, const CocycleFamily& family,
                                      const Tolerance& tol = {});

/// A G-invariant state has a flow commuting with G; not-applicable otherwise.
Verdict check_invariant_case(const FlowGroupCommutation& commutation, const CocycleFamily& family);

/// phi(g(sigma_t(a))) = phi(sigma_t(g(a))) = phi(g(a)).
Verdict check_state_level_commutation(const ModularFlow& flow, const CocycleFamily& family,
                                      const Tolerance& tol = {});

struct MeanModularCommutation {
  /// phi E = phi sigma_t E = phi E sigma_t.
  Verdict state_level;
  /// sigma_t E = E sigma_t, gated on the flow commuting with G.
  Verdict map_level;
  /// The same identity gated on C in Z or Centr(phi) in F(G).
  Verdict sufficient_condition;
};

MeanModularCommutation check_mean_modular_commutation(const ModularFlow& flow,
                                                      const CocycleFamily& family,
                                                      const FlowGroupCommutation& commutation,
                                                      const Tolerance& tol = {});

/// E_G(Centr(phi)) in Centr(phi) and sigma_t(F(G)) in F(G), gated on commutation.
Verdict check_inclusion(const ModularFlow& flow, const CocycleFamily& family,
                        const FlowGroupCommutation& commutation, const Tolerance& tol = {});

/// E_G = pinching, gated on phi G-invariant and Centr(phi) in F(G).
Verdict check_ergodic_coincidence(const ModularFlow& flow, const CocycleFamily& family,
                                  const Tolerance& tol = {});

struct InvarianceEquivalence {
  bool invariant = false;
  bool strong_and_fixed = false;
  bool commuting_and_fixed = false;
  Verdict verdict;
};

/// phi G-invariant <=> (strongly quasi and C in F(G)) <=> (flow commutes with G
/// and every x_g in F(G)), each predicate evaluated on its own.
InvarianceEquivalence check_invariance_equivalence(const ModularFlow& flow,
                                                   const CocycleFamily& family,
                                                   const FlowGroupCommutation& commutation,
                                                   const Tolerance& tol = {});

}  // namespace quasi
