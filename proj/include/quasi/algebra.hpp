#pragma once

// *-subalgebras of a full matrix algebra M_m, stored as Hilbert-Schmidt
// orthonormal bases. Span membership is a projection-residual test.

#include <cstddef>
#include <vector>

#include "quasi/linalg.hpp"

namespace quasi {

class AlgebraBasis {
 public:
  /// `basis` must already be HS-orthonormal m x m matrices; use span_of otherwise.
  AlgebraBasis(Index ambient_dim, std::vector<Matrix> basis);

  Index ambient_dim() const { return ambient_dim_; }
  std::size_t dimension() const { return basis_.size(); }
  const std::vector<Matrix>& basis() const { return basis_; }

  /// Orthogonal (HS) projection onto the span.
  Matrix project(const Matrix& x) const;
  /// HS norm of x - project(x).
  double residual(const Matrix& x) const;
  bool contains(const Matrix& x, const Tolerance& tol = {}) const;

 private:
  Index ambient_dim_;
  std::vector<Matrix> basis_;
};

/// Largest residual of any element of `inner` against `outer`, and whether all are within tol.
struct Containment {
  bool contained = true;
  double worst_residual = 0.0;
};

struct AbelianReport {
  bool abelian = true;
  double worst_commutator = 0.0;
  std::size_t first = 0;
  std::size_t second = 0;
};

/// Residuals of the AlgebraBasis invariants: unit, adjoint and product closure.
struct ClosureReport {
  double unit_residual = 0.0;
  double adjoint_residual = 0.0;
  double product_residual = 0.0;
  bool closed = true;
};

/// Rank threshold for orthogonalisation: abs-tol * sqrt(ambient dim), applied
/// to candidates normalised to unit HS norm.
double rank_threshold(Index ambient_dim, const Tolerance& tol);

/// HS-orthonormal basis of span(elements). Not closed under anything.
AlgebraBasis span_of(Index ambient_dim, const std::vector<Matrix>& elements,
                     const Tolerance& tol = {});

AlgebraBasis full_algebra(Index n);
AlgebraBasis scalars(Index n);

/// Smallest unital *-subalgebra containing the seeds. Throws DimensionMismatch.
AlgebraBasis generate_algebra(const std::vector<Matrix>& seeds, Index ambient_dim,
                              const Tolerance& tol = {});

/// {x : [x, e] = 0 for every element e}.
AlgebraBasis commutant_of(const std::vector<Matrix>& elements, Index ambient_dim,
                          const Tolerance& tol = {});
AlgebraBasis commutant(const AlgebraBasis& alg, const Tolerance& tol = {});
AlgebraBasis center(const AlgebraBasis& alg, const Tolerance& tol = {});

/// Joint fixed points of the conjugations a -> u a u^dagger.
AlgebraBasis fixed_points_of_unitaries(const std::vector<Matrix>& unitaries, Index ambient_dim,
                                       const Tolerance& tol = {});

AlgebraBasis intersection(const AlgebraBasis& a, const AlgebraBasis& b, const Tolerance& tol = {});

Containment span_contains(const AlgebraBasis& outer, const AlgebraBasis& inner,
                          const Tolerance& tol = {});
bool same_span(const AlgebraBasis& a, const AlgebraBasis& b, const Tolerance& tol = {});

AbelianReport is_abelian(const AlgebraBasis& alg, const Tolerance& tol = {});
ClosureReport check_closure(const AlgebraBasis& alg, const Tolerance& tol = {});

/// Orthonormal basis (columns) of the null space of `a`, singular values <= threshold.
Matrix null_space(const Matrix& a, double threshold);

}  // namespace quasi
