#include "quasi/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quasi/errors.hpp"

namespace quasi {

namespace {

// Growing orthonormal column basis of a subspace of C^(m*m). Candidates are
// normalised, projected out twice against the basis (classical Gram-Schmidt
// with one reorthogonalisation pass, batched as matrix products), then
// accepted one by one when the residual exceeds the rank threshold.
class OrthonormalColumns {
 public:
  OrthonormalColumns(Index length, double threshold) : q_(length, 0), threshold_(threshold) {}

  Index size() const { return q_.cols(); }
  const Matrix& columns() const { return q_; }

  /// Returns the number of columns appended.
  Index add(Matrix candidates) {
    Index kept = 0;
    // Candidates negligible against the largest one in the batch are rounding
    // noise; normalising them would promote the noise to a basis direction.
    double scale = 0.0;
    for (Index j = 0; j < candidates.cols(); ++j) scale = std::max(scale, candidates.col(j).norm());
    for (Index j = 0; j < candidates.cols(); ++j) {
      const double norm = candidates.col(j).norm();
      if (norm <= threshold_ * scale) {
        candidates.col(j).setZero();
      } else {
        candidates.col(j) /= norm;
      }
    }
    if (q_.cols() > 0) {
      for (int pass = 0; pass < 2; ++pass) candidates -= q_ * (q_.adjoint() * candidates);
    }
    const Index before = q_.cols();
    for (Index j = 0; j < candidates.cols(); ++j) {
      Vector r = candidates.col(j);
      for (int pass = 0; pass < 2; ++pass) {
        for (Index k = before; k < q_.cols(); ++k) r -= q_.col(k).dot(r) * q_.col(k);
      }
      const double rn = r.norm();
      if (rn <= threshold_) continue;
      q_.conservativeResize(Eigen::NoChange, q_.cols() + 1);
      q_.col(q_.cols() - 1) = r / rn;
      ++kept;
    }
    return kept;
  }

 private:
  Matrix q_;
  double threshold_;
};

Matrix as_columns(const std::vector<Matrix>& elements, Index m) {
  Matrix cols(m * m, static_cast<Index>(elements.size()));
  for (std::size_t k = 0; k < elements.size(); ++k) {
    if (elements[k].rows() != m || elements[k].cols() != m) {
      throw DimensionMismatch("algebra element of size " + std::to_string(elements[k].rows()) +
                              " in ambient dimension " + std::to_string(m));
    }
    cols.col(static_cast<Index>(k)) = vec(elements[k]);
  }
  return cols;
}

std::vector<Matrix> from_columns(const Matrix& cols, Index m) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(cols.cols()));
  for (Index k = 0; k < cols.cols(); ++k) out.push_back(unvec(cols.col(k), m));
  return out;
}

AlgebraBasis basis_from_null_space(const Matrix& system, Index m, const Tolerance& tol) {
  const Matrix kernel = null_space(system, rank_threshold(m, tol));
  return AlgebraBasis(m, from_columns(kernel, m));
}

}  // namespace

AlgebraBasis::AlgebraBasis(Index ambient_dim, std::vector<Matrix> basis)
    : ambient_dim_(ambient_dim), basis_(std::move(basis)) {
  if (ambient_dim_ <= 0) throw DimensionMismatch("ambient dimension must be positive");
  for (const auto& b : basis_) {
    if (b.rows() != ambient_dim_ || b.cols() != ambient_dim_) {
      throw DimensionMismatch("basis element does not match ambient dimension");
    }
  }
}

Matrix AlgebraBasis::project(const Matrix& x) const {
  Matrix out = Matrix::Zero(ambient_dim_, ambient_dim_);
  for (const auto& b : basis_) out += hs_inner(b, x) * b;
  return out;
}

double AlgebraBasis::residual(const Matrix& x) const {
  if (x.rows() != ambient_dim_ || x.cols() != ambient_dim_) {
    throw DimensionMismatch("element does not match ambient dimension");
  }
  return hs_norm(x - project(x));
}

bool AlgebraBasis::contains(const Matrix& x, const Tolerance& tol) const {
  const double scale = hs_norm(x);
  return residual(x) <= tol.threshold(scale, scale);
}

double rank_threshold(Index ambient_dim, const Tolerance& tol) {
  return tol.abs() * std::sqrt(static_cast<double>(ambient_dim));
}

Matrix null_space(const Matrix& a, double threshold) {
  const Index n = a.cols();
  if (n == 0) return Matrix(0, 0);
  Matrix system = a;
  if (system.rows() < n) {
    system.conservativeResize(n, Eigen::NoChange);
    system.bottomRows(n - a.rows()).setZero();
  }
  // BDCSVD in Eigen 3.4 returns NaN vectors on some exactly structured systems.
  Eigen::JacobiSVD<Matrix> svd(system, Eigen::ComputeFullV);
  if (!svd.matrixV().allFinite()) throw NumericalFailure("null space: SVD did not converge");
  const auto& sv = svd.singularValues();
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > threshold) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

AlgebraBasis span_of(Index ambient_dim, const std::vector<Matrix>& elements,
                     const Tolerance& tol) {
  OrthonormalColumns cols(ambient_dim * ambient_dim, rank_threshold(ambient_dim, tol));
  if (!elements.empty()) cols.add(as_columns(elements, ambient_dim));
  return AlgebraBasis(ambient_dim, from_columns(cols.columns(), ambient_dim));
}

AlgebraBasis full_algebra(Index n) { return AlgebraBasis(n, matrix_units(n)); }

AlgebraBasis scalars(Index n) {
  return AlgebraBasis(n, {identity(n) / std::sqrt(static_cast<double>(n))});
}

AlgebraBasis generate_algebra(const std::vector<Matrix>& seeds, Index m, const Tolerance& tol) {
  std::vector<Matrix> with_adjoints;
  with_adjoints.reserve(2 * seeds.size());
  for (const auto& s : seeds) {
    with_adjoints.push_back(s);
    with_adjoints.push_back(s.adjoint());
  }
  const AlgebraBasis generators = span_of(m, with_adjoints, tol);

  // Closure under left multiplication by generators, starting from the unit,
  // spans every word in the generators.
  OrthonormalColumns cols(m * m, rank_threshold(m, tol));
  cols.add(vec(identity(m)));
  Index frontier_begin = 0;
  while (frontier_begin < cols.size()) {
    const Index frontier_end = cols.size();
    const Index frontier = frontier_end - frontier_begin;
    Matrix candidates(m * m, frontier * static_cast<Index>(generators.dimension()));
    Index c = 0;
    for (const auto& g : generators.basis()) {
      for (Index k = frontier_begin; k < frontier_end; ++k) {
        const Matrix f = unvec(cols.columns().col(k), m);
        candidates.col(c++) = vec(g * f);
      }
    }
    frontier_begin = frontier_end;
    if (candidates.cols() > 0) cols.add(std::move(candidates));
  }
  return AlgebraBasis(m, from_columns(cols.columns(), m));
}

AlgebraBasis commutant_of(const std::vector<Matrix>& elements, Index m, const Tolerance& tol) {
  if (elements.empty()) return full_algebra(m);
  const Matrix id = identity(m);
  Matrix system(static_cast<Index>(elements.size()) * m * m, m * m);
  for (std::size_t k = 0; k < elements.size(); ++k) {
    const Matrix& e = elements[k];
    if (e.rows() != m || e.cols() != m) throw DimensionMismatch("commutant: element size");
    const double scale = hs_norm(e);
    const Matrix b = scale > 0.0 ? Matrix(e / scale) : e;
    // vec(x b - b x) = (b^T kron I - I kron b) vec(x)
    system.middleRows(static_cast<Index>(k) * m * m, m * m) =
        kron(b.transpose(), id) - kron(id, b);
  }
  return basis_from_null_space(system, m, tol);
}

AlgebraBasis commutant(const AlgebraBasis& alg, const Tolerance& tol) {
  return commutant_of(alg.basis(), alg.ambient_dim(), tol);
}

AlgebraBasis center(const AlgebraBasis& alg, const Tolerance& tol) {
  return intersection(alg, commutant(alg, tol), tol);
}

AlgebraBasis fixed_points_of_unitaries(const std::vector<Matrix>& unitaries, Index m,
                                       const Tolerance& tol) {
  if (unitaries.empty()) return full_algebra(m);
  const Matrix id = identity(m * m);
  Matrix system(static_cast<Index>(unitaries.size()) * m * m, m * m);
  for (std::size_t k = 0; k < unitaries.size(); ++k) {
    const Matrix& u = unitaries[k];
    if (u.rows() != m || u.cols() != m) throw DimensionMismatch("fixed points: unitary size");
    // vec(u a u^dagger) = (conj(u) kron u) vec(a)
    system.middleRows(static_cast<Index>(k) * m * m, m * m) = kron(u.conjugate(), u) - id;
  }
  return basis_from_null_space(system, m, tol);
}

AlgebraBasis intersection(const AlgebraBasis& a, const AlgebraBasis& b, const Tolerance& tol) {
  if (a.ambient_dim() != b.ambient_dim()) throw DimensionMismatch("intersection: ambient dims");
  const Index m = a.ambient_dim();
  if (a.dimension() == 0 || b.dimension() == 0) return AlgebraBasis(m, {});
  const Matrix qa = as_columns(a.basis(), m);
  const Matrix qb = as_columns(b.basis(), m);
  Matrix joint(m * m, qa.cols() + qb.cols());
  joint << qa, -qb;
  const Matrix kernel = null_space(joint, rank_threshold(m, tol));
  std::vector<Matrix> elements;
  for (Index k = 0; k < kernel.cols(); ++k) {
    elements.push_back(unvec(qa * kernel.col(k).head(qa.cols()), m));
  }
  return span_of(m, elements, tol);
}

Containment span_contains(const AlgebraBasis& outer, const AlgebraBasis& inner,
                          const Tolerance& tol) {
  Containment out;
  for (const auto& x : inner.basis()) {
    const double r = outer.residual(x);
    out.worst_residual = std::max(out.worst_residual, r);
    if (r > tol.threshold(1.0, 1.0)) out.contained = false;
  }
  return out;
}

bool same_span(const AlgebraBasis& a, const AlgebraBasis& b, const Tolerance& tol) {
  return a.dimension() == b.dimension() && span_contains(a, b, tol).contained &&
         span_contains(b, a, tol).contained;
}

AbelianReport is_abelian(const AlgebraBasis& alg, const Tolerance& tol) {
  AbelianReport out;
  const auto& basis = alg.basis();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      const double c = max_entry_norm(commutator(basis[i], basis[j]));
      if (c > out.worst_commutator) {
        out.worst_commutator = c;
        out.first = i;
        out.second = j;
      }
    }
  }
  out.abelian = out.worst_commutator <= tol.threshold(1.0, 1.0);
  return out;
}

ClosureReport check_closure(const AlgebraBasis& alg, const Tolerance& tol) {
  ClosureReport out;
  const Index m = alg.ambient_dim();
  out.unit_residual = alg.residual(identity(m)) / std::sqrt(static_cast<double>(m));
  for (const auto& b : alg.basis()) {
    out.adjoint_residual = std::max(out.adjoint_residual, alg.residual(b.adjoint()));
    for (const auto& c : alg.basis()) {
      out.product_residual = std::max(out.product_residual, alg.residual(b * c));
    }
  }
  const double limit = tol.threshold(1.0, 1.0);
  out.closed = out.unit_residual <= limit && out.adjoint_residual <= limit &&
               out.product_residual <= limit;
  return out;
}

}  // namespace quasi
