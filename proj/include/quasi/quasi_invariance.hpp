#pragma once

// States on M_n, Radon-Nikodym cocycles of a group action, the invariance
// classification, kappa = mean of the cocycles, the averaged state phi_G and
// centralizers.

#include <cstddef>
#include <string_view>
#include <vector>

#include "quasi/algebra.hpp"
#include "quasi/group.hpp"
#include "quasi/linalg.hpp"
#include "quasi/verdict.hpp"

namespace quasi {

/// phi(a) = Tr(rho a) with rho Hermitian, strictly positive, trace one.
class FaithfulState {
 public:
  /// Throws DimensionMismatch, NotHermitian, or NotFaithful (trace or smallest
  /// eigenvalue out of range). The stored density is the Hermitian part.
  explicit FaithfulState(const Matrix& density, const Tolerance& tol = {});

  static FaithfulState maximally_mixed(Index n);

  Index dim() const { return rho_.rows(); }
  const Matrix& density() const { return rho_; }
  const SpectralDecomposition& spectrum() const { return spectrum_; }

  cplx evaluate(const Matrix& a) const;
  /// rho^z.
  Matrix power(cplx z) const { return hermitian_power(spectrum_, z); }

 private:
  Matrix rho_;
  SpectralDecomposition spectrum_;
};

/// a -> Tr(D a) for an invertible D, not necessarily Hermitian or positive.
/// Carries the functionals omega(K^{-1} a) whose K does not commute with rho.
class LinearFunctional {
 public:
  /// Throws DimensionMismatch, or NotFaithful when D is singular.
  explicit LinearFunctional(Matrix density, const Tolerance& tol = {});

  Index dim() const { return d_.rows(); }
  const Matrix& density() const { return d_; }
  cplx evaluate(const Matrix& a) const;

  /// True when D is Hermitian, strictly positive and of unit trace.
  bool is_faithful_state(const Tolerance& tol = {}) const;

 private:
  Matrix d_;
};

enum class InvarianceClass { invariant, strongly_quasi, quasi_only };
std::string_view class_name(InvarianceClass c);

/// The x with Tr(D u a u^dagger) = Tr(D x a) for all a: x = D^{-1} u^dagger D u.
Matrix cocycle_from_density(const Matrix& density, const Matrix& unitary);

Matrix cocycle_of(const FaithfulState& state, const GroupAction& action, std::size_t g);

class CocycleFamily {
 public:
  CocycleFamily(GroupAction action, Matrix density, std::vector<Matrix> cocycles,
                InvarianceClass cls, double hermitian_deviation, double identity_deviation);

  const GroupAction& action() const { return action_; }
  /// Density of the functional the cocycles belong to.
  const Matrix& density() const { return density_; }
  const std::vector<Matrix>& cocycles() const { return cocycles_; }
  const Matrix& cocycle(std::size_t g) const { return cocycles_[g]; }
  InvarianceClass classification() const { return class_; }
  bool strongly_quasi() const { return class_ != InvarianceClass::quasi_only; }
  double max_hermitian_deviation() const { return hermitian_deviation_; }
  double max_identity_deviation() const { return identity_deviation_; }
  /// Always false: every cocycle here is a bounded matrix, so the unbounded
  /// "generalized sense" never has a separate witness.
  bool unbounded() const { return false; }

 private:
  GroupAction action_;
  Matrix density_;
  std::vector<Matrix> cocycles_;
  InvarianceClass class_;
  double hermitian_deviation_;
  double identity_deviation_;
};

/// Borderline cases go to the weaker class: strongly quasi needs every x_g
/// Hermitian within tol, invariant additionally needs every x_g within tol of I.
CocycleFamily classify_invariance(const FaithfulState& state, const GroupAction& action,
                                  const Tolerance& tol = {});
CocycleFamily classify_invariance(const LinearFunctional& functional, const GroupAction& action,
                                  const Tolerance& tol = {});

/// (1/|G|) sum_g x_g. Throws NotStronglyQuasiInvariant.
Matrix kappa(const CocycleFamily& family);

/// The state a -> phi(kappa a), density rho kappa. Throws NotStronglyQuasiInvariant.
FaithfulState averaged_state(const FaithfulState& state, const CocycleFamily& family,
                             const Tolerance& tol = {});

/// {x : phi(xy) = phi(yx) for all y}, computed as the commutant of rho.
AlgebraBasis centralizer(const FaithfulState& state, const Tolerance& tol = {});

/// The algebra generated by the cocycles.
AlgebraBasis cocycle_algebra(const CocycleFamily& family, const Tolerance& tol = {});

// Checks. Each returns a verdict with the worst deviation over all group
// elements and matrix units; checks whose hypothesis is strong quasi
// invariance report not-applicable otherwise.

Verdict check_defining_relation(const CocycleFamily& family, const Tolerance& tol = {});
Verdict check_cocycle_identity(const CocycleFamily& family, const Tolerance& tol = {});
Verdict check_chain_rule(const CocycleFamily& family, const Tolerance& tol = {});
Verdict check_inverse_law(const CocycleFamily& family, const Tolerance& tol = {});
/// phi(x_g a) = phi(a x_g^dagger); needs a Hermitian functional.
Verdict check_trace_symmetry(const FaithfulState& state, const CocycleFamily& family,
                             const Tolerance& tol = {});
/// x_g Hermitian, strictly positive, pairwise commuting; the generated algebra
/// is abelian and contained in Centr(phi).
Verdict check_strong_structure(const FaithfulState& state, const CocycleFamily& family,
                               const Tolerance& tol = {});
/// kappa and kappa^{-1} lie in Centr(phi) and Centr(phi_G); kappa is positive definite.
Verdict check_kappa_centralizer(const FaithfulState& state, const CocycleFamily& family,
                                const Tolerance& tol = {});
/// phi_G is G-invariant and phi(kappa a) = phi(E_G(a)).
Verdict check_averaged_state(const FaithfulState& state, const CocycleFamily& family,
                             const Tolerance& tol = {});
/// Whenever x_g lies in F(G) within tol, x_g = I within tol.
Verdict check_fixed_cocycle_lemma(const CocycleFamily& family, const Tolerance& tol = {});

}  // namespace quasi
