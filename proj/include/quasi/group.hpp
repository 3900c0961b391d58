#pragma once

// Finite groups acting on M_n by inner *-automorphisms, and the uniform
// group mean E_G(x) = (1/|G|) sum_g g(x).

#include <cstddef>
#include <vector>

#include "quasi/algebra.hpp"
#include "quasi/linalg.hpp"
#include "quasi/verdict.hpp"

namespace quasi {

using GroupTable = std::vector<std::vector<std::size_t>>;

/// Finite group given by its multiplication table: table[a][b] = a * b.
class FiniteGroup {
 public:
  /// Validates the Latin-square property, an identity, inverses, and
  /// associativity (exhaustive up to order 64, sampled above). Throws InvalidGroup.
  explicit FiniteGroup(GroupTable table);

  std::size_t order() const { return table_.size(); }
  std::size_t identity() const { return identity_; }
  std::size_t multiply(std::size_t a, std::size_t b) const { return table_[a][b]; }
  std::size_t inverse(std::size_t a) const { return inverse_[a]; }
  const GroupTable& table() const { return table_; }

  /// True if `elements` contains the identity and is closed under products and inverses.
  bool is_subgroup(const std::vector<std::size_t>& elements) const;

 private:
  GroupTable table_;
  std::size_t identity_ = 0;
  std::vector<std::size_t> inverse_;
};

/// Z_N with table[i][j] = (i + j) mod N. Throws InvalidParams for N = 0.
FiniteGroup cyclic_group(std::size_t n);

/// Subgroup chain {0} < ... < Z_N of the cyclic group, one prime index step at a time.
std::vector<std::vector<std::size_t>> cyclic_subgroup_chain(std::size_t n);

/// a -> u a u^dagger for a unitary u.
class StarAutomorphism {
 public:
  /// Throws NotUnitary. Re-verifies multiplicativity and *-preservation on a
  /// few deterministic random samples.
  explicit StarAutomorphism(Matrix unitary, const Tolerance& tol = {});

  Index dim() const { return u_.rows(); }
  const Matrix& implementing_unitary() const { return u_; }

  Matrix apply(const Matrix& a) const { return u_ * a * u_.adjoint(); }
  Matrix apply_inverse(const Matrix& a) const { return u_.adjoint() * a * u_; }

 private:
  Matrix u_;
};

class GroupAction {
 public:
  /// Throws DimensionMismatch, NotUnitary, or HomomorphismViolation. The
  /// unitaries need only form a projective representation: the law is
  /// demanded of the conjugation maps, checked exhaustively for |G| <= 64.
  GroupAction(FiniteGroup group, const std::vector<Matrix>& unitaries, const Tolerance& tol = {});

  const FiniteGroup& group() const { return group_; }
  std::size_t order() const { return group_.order(); }
  Index dim() const { return maps_.front().dim(); }
  const StarAutomorphism& map(std::size_t g) const { return maps_[g]; }
  std::vector<Matrix> unitaries() const;

  Matrix apply(std::size_t g, const Matrix& a) const { return maps_[g].apply(a); }

 private:
  FiniteGroup group_;
  std::vector<StarAutomorphism> maps_;
};

/// Distance of the map Ad(u_{gh}^dagger u_g u_h) from the identity map, measured
/// as how far u_{gh}^dagger u_g u_h is from a scalar multiple of I.
double homomorphism_deviation(const Matrix& ug, const Matrix& uh, const Matrix& ugh);

GroupAction build_action(const FiniteGroup& group, const std::vector<Matrix>& unitaries,
                         const Tolerance& tol = {});

/// (1/|G|) sum_g g(x). Throws DimensionMismatch.
Matrix mean_over_group(const GroupAction& action, const Matrix& x);

/// Mean over the listed elements only (a subgroup).
Matrix mean_over_elements(const GroupAction& action, const std::vector<std::size_t>& elements,
                          const Matrix& x);

AlgebraBasis fixed_point_algebra(const std::vector<StarAutomorphism>& maps, Index dim,
                                 const Tolerance& tol = {});
AlgebraBasis fixed_point_algebra(const GroupAction& action, const Tolerance& tol = {});

/// Re-evaluates the identity and pair laws of the maps; never throws.
Verdict check_action_homomorphism(const GroupAction& action, const Tolerance& tol = {});

/// E_G on matrix units: idempotent, range fixed by every g, *-preserving,
/// positive, an F(G)-bimodule map, and invariant under translating the average.
Verdict check_mean_properties(const GroupAction& action, const Tolerance& tol = {});

}  // namespace quasi
