#pragma once

// GNS space of a faithful state on M_n realised as C^{n^2}: the vector of a
// is xi(a) = vec(a rho^{1/2}), so <xi(a), xi(b)> = phi(a^dagger b) and the
// standard basis vectors are the matrix units orthonormalised against phi.
// In these coordinates pi(a) = I kron a and J acts as X -> X^dagger.

#include <cstddef>
#include <string>
#include <vector>

#include "quasi/algebra.hpp"
#include "quasi/antilinear.hpp"
#include "quasi/quasi_invariance.hpp"
#include "quasi/verdict.hpp"

namespace quasi {

class GnsSystem {
 public:
  /// Throws NotFaithful (through FaithfulState) or NotPositiveDefinite.
  explicit GnsSystem(const FaithfulState& state, const Tolerance& tol = {});

  const FaithfulState& state() const { return state_; }
  Index base_dim() const { return state_.dim(); }
  Index space_dim() const { return base_dim() * base_dim(); }

  /// xi(a) = vec(a rho^{1/2}).
  Vector vector_of(const Matrix& a) const;
  const Vector& omega() const { return omega_; }
  Matrix pi(const Matrix& a) const;
  /// J pi(a) J, the right action X -> X a^dagger.
  Matrix commutant_pi(const Matrix& a) const;

  const Antilinear& s() const { return s_; }
  const Antilinear& f() const { return f_; }
  const Antilinear& j() const { return j_; }
  const Matrix& delta() const { return delta_; }
  /// Delta^z.
  Matrix delta_power(cplx z) const { return hermitian_power(delta_spectrum_, z); }

 private:
  FaithfulState state_;
  Matrix rho_sqrt_;
  Matrix rho_inv_sqrt_;
  Vector omega_;
  Antilinear s_;
  Antilinear f_;
  Antilinear j_;
  Matrix delta_;
  SpectralDecomposition delta_spectrum_;
};

GnsSystem build_gns(const FaithfulState& state, const Tolerance& tol = {});

/// GNS data, J, Delta = F S and the commutant property, on matrix units.
Verdict check_gns_system(const GnsSystem& gns, const Tolerance& tol = {});

/// Delta against the closed form (rho^{-1})^T kron rho, and Delta^{it} pi(a) Delta^{-it} = pi(sigma_t(a)).
Verdict check_delta_closed_form(const GnsSystem& gns, const std::vector<double>& times,
                                const Tolerance& tol = {});

struct GnsShift {
  std::size_t g = 0;
  Matrix sqrt_x;
  Matrix inv_sqrt_x;
  Vector omega_g;
  Matrix u;
  Matrix v;
  Antilinear s;
  Antilinear f;
  Antilinear j;
  Matrix delta;
};

/// Throws NotStronglyQuasiInvariant.
GnsShift shift_for(const GnsSystem& gns, const CocycleFamily& family, std::size_t g,
                   const Tolerance& tol = {});

std::vector<GnsShift> shifts_for(const GnsSystem& gns, const CocycleFamily& family,
                                 const Tolerance& tol = {});

/// <Omega_g, pi(a) Omega_g> = phi(g(a)).
Verdict check_shift_state(const GnsSystem& gns, const CocycleFamily& family,
                          const std::vector<GnsShift>& shifts, const Tolerance& tol = {});
/// [pi(sqrt x_g), Delta] = 0 and Omega_g = Delta^{1/4} pi(sqrt x_g) Omega.
Verdict check_shift_cone(const GnsSystem& gns, const std::vector<GnsShift>& shifts,
                         const Tolerance& tol = {});
/// J_g = J and J Omega_g = Omega_g.
Verdict check_shift_j(const GnsSystem& gns, const std::vector<GnsShift>& shifts,
                      const Tolerance& tol = {});
/// U_g, V_g unitary; U_e = I; U_g U_h = U_gh; U_g^dagger = U_{g^-1}; V_g = J U_g J.
Verdict check_shift_unitaries(const GnsSystem& gns, const CocycleFamily& family,
                              const std::vector<GnsShift>& shifts, const Tolerance& tol = {});

/// U_g pi(a) U_g^* = pi(g(a)) and V_g J pi(a) J V_g^* = J pi(g(a)) J.
Verdict check_covariance(const GnsSystem& gns, const CocycleFamily& family,
                         const std::vector<GnsShift>& shifts, const Tolerance& tol = {});

/// The six operator identities relating S_g, F_g, Delta_g to the phi objects,
/// in order: S exchange, F exchange, Delta_g factorisation, S_g formula,
/// Delta_g^{1/2} formula, U_g S_g formula.
std::vector<Verdict> check_modular_relations(const GnsSystem& gns,
                                             const std::vector<GnsShift>& shifts,
                                             const Tolerance& tol = {});

/// (1/|G|) sum_g U_g.
Matrix projection_pg(const std::vector<GnsShift>& shifts);
Matrix projection_over(const std::vector<GnsShift>& shifts, const std::vector<std::size_t>& elements);

/// Idempotent, self-adjoint, absorbs every U_g, range fixed by every U_g, and
/// rank equal to the dimension of the joint fixed space (null-space oracle).
Verdict check_projection(const std::vector<GnsShift>& shifts, const Matrix& pg,
                         const Tolerance& tol = {});

/// E~_G(pi(a)) = (1/|G|) sum_g U_g pi(a) U_g^*.
Matrix lifted_expectation(const std::vector<GnsShift>& shifts, const Matrix& pi_a);

/// Three verdicts over matrix units a, with E = E~_G(pi(a)):
/// block1: P pi(a) P = E P = P E = P E P; block2: P^perp E P = P E P^perp = 0;
/// invariance: E = pi(E_G(a)) and U_g E U_g^* = E for every g.
std::vector<Verdict> check_lifted_expectation(const GnsSystem& gns, const CocycleFamily& family,
                                 const std::vector<GnsShift>& shifts, const Matrix& pg,
                                 const Tolerance& tol = {});

struct CompressedAbelianness {
  bool lhs = false;
  bool rhs = false;
  bool agree = false;
  double lhs_commutator = 0.0;
  double rhs_commutator = 0.0;
  std::string route;
  Verdict verdict;
};

enum class AbelianRoute { automatic, direct, duality };

/// Whether P_G R P_G and P_G Fix(u_G) P_G are abelian, R generated by pi(M_n)
/// and the U_g. The direct route generates R inside M_{n^2}; the duality route
/// obtains P_G R P_G as the commutant of the compressed right multiplications
/// commuting with every U_g. `automatic` picks direct for GNS dimension <= 9.
CompressedAbelianness compressed_abelianness(const GnsSystem& gns, const CocycleFamily& family,
                                             const std::vector<GnsShift>& shifts,
                                             const Matrix& pg,
                                             AbelianRoute route = AbelianRoute::automatic,
                                             const Tolerance& tol = {});

struct ChainStage {
  std::size_t order = 0;
  Index rank = 0;
  /// max over matrix units of |E~_N(pi(a)) P_G - P_G pi(a) P_G|, max-entry.
  double deviation = 0.0;
  /// The same in Hilbert-Schmidt norm, which is monotone along the chain.
  double hs_deviation = 0.0;
};

struct ChainReport {
  std::vector<ChainStage> stages;
  bool nested = true;
  bool monotone = true;
  bool final_exact = true;
  Verdict verdict;
};

/// `chain` lists element sets G_1 in G_2 in ... ending at the whole group.
/// Throws ChainNotNested when a set is not a subgroup, the sets are not
/// increasing, or the last is not the group.
ChainReport subgroup_chain_limit(const GnsSystem& gns, const CocycleFamily& family,
                                 const std::vector<GnsShift>& shifts,
                                 const std::vector<std::vector<std::size_t>>& chain,
                                 const Tolerance& tol = {});

}  // namespace quasi
