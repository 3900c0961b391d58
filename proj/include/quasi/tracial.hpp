#pragma once
// Mean density kappa and the decomposition phi(a) = tau(c a) against the
// G-invariant trace. On M_n the trace is Tr, so c is forced to be rho and the
// question of whether c is G-fixed becomes a measured residual.

#include "quasi/quasi_invariance.hpp"
#include "quasi/verdict.hpp"

namespace quasi {

struct TracialDecomposition {
  Matrix trace_density;
  Matrix b;
  Matrix c;
  /// HS norm of c minus its orthogonal projection onto F(G).
  double c_in_FG_residual = 0.0;
};

/// F(G) ∩ Z = C·1 on the ambient algebra.
struct ErgodicityGate {
  bool ergodic = true;
  std::size_t intersection_dim = 1;
};
ErgodicityGate ergodicity_on_center(const GroupAction& action, const Tolerance& tol = {});

/// kappa Hermitian, positive definite, in Centr(phi); phi_G a G-invariant state.
/// Not-applicable when the family is not strongly quasi invariant or the
/// ergodicity gate fails.
Verdict mean_density_checks(const FaithfulState& state, const CocycleFamily& family,
                            const Tolerance& tol = {});

/// Throws NotStronglyQuasiInvariant or ErgodicityHypothesisFailed.
TracialDecomposition tracial_decomposition(const FaithfulState& state, const CocycleFamily& family,
                                           const Tolerance& tol = {});

/// Largest |phi(a) - Tr(c a)| over matrix units.
double reconstruction_deviation(const FaithfulState& state, const TracialDecomposition& d);

/// Trace property and G-invariance of tau, reconstruction, b in F(G), [b, kappa^-1] = 0.
/// The residual of c against F(G) is reported in the note only.
Verdict check_tracial_decomposition(const FaithfulState& state, const CocycleFamily& family,
                                    const TracialDecomposition& d, const Tolerance& tol = {});

}  // namespace quasi
