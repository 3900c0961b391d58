#include "quasi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quasi/errors.hpp"
#include "quasi/kernels.hpp"

namespace quasi {

Tolerance::Tolerance(double abs, double rel) : abs_(abs), rel_(rel) {
  if (!(abs > 0.0) || !(rel >= 0.0)) {
    throw InvalidParams("tolerance requires abs > 0 and rel >= 0");
  }
}

double Tolerance::threshold(double scale_a, double scale_b) const {
  return abs_ + rel_ * std::max(scale_a, scale_b);
}

double max_entry_norm(const Matrix& m) { return kernels::max_abs(entries(m)); }

double max_entry_deviation(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch("cannot compare " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " with " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
  }
  return kernels::max_abs_diff(entries(a), entries(b));
}

Comparison approx_equal(const Matrix& a, const Matrix& b, const Tolerance& tol) {
  Comparison out;
  out.deviation = max_entry_deviation(a, b);
  out.threshold = tol.threshold(max_entry_norm(a), max_entry_norm(b));
  // an infinite deviation would otherwise pass against its own infinite scale
  out.equal = std::isfinite(out.deviation) && out.deviation <= out.threshold;
  return out;
}

double hermitian_deviation(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("hermiticity of a non-square matrix");
  const Matrix adj = m.adjoint();
  return max_entry_deviation(m, adj);
}

double unitary_deviation(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("unitarity of a non-square matrix");
  const Matrix gram = m.adjoint() * m;
  return max_entry_deviation(gram, identity(m.rows()));
}

bool is_hermitian(const Matrix& m, const Tolerance& tol) {
  const double scale = max_entry_norm(m);
  return hermitian_deviation(m) <= tol.threshold(scale, scale);
}

bool is_unitary(const Matrix& m, const Tolerance& tol) {
  return unitary_deviation(m) <= tol.threshold(1.0, 1.0);
}

Operator::Operator(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw DimensionMismatch("operator must be a non-empty square matrix");
  }
}

Operator Operator::hermitian(Matrix entries, const Tolerance& tol) {
  Operator op(std::move(entries));
  if (!is_hermitian(op.entries_, tol)) {
    throw NotHermitian("operator is not Hermitian (deviation " +
                       std::to_string(hermitian_deviation(op.entries_)) + ")");
  }
  op.flags_.hermitian = true;
  return op;
}

Operator Operator::positive_definite(Matrix entries, const Tolerance& tol) {
  Operator op = hermitian(std::move(entries), tol);
  const auto spectrum = hermitian_eigen(op.entries_, tol);
  if (spectrum.values.minCoeff() <= tol.abs()) {
    throw NotPositiveDefinite("smallest eigenvalue " + std::to_string(spectrum.values.minCoeff()) +
                              " is not above tolerance");
  }
  op.flags_.positive_definite = true;
  return op;
}

Operator Operator::unitary(Matrix entries, const Tolerance& tol) {
  Operator op(std::move(entries));
  if (!is_unitary(op.entries_, tol)) {
    throw NotUnitary("operator is not unitary (deviation " +
                     std::to_string(unitary_deviation(op.entries_)) + ")");
  }
  op.flags_.unitary = true;
  return op;
}

SpectralDecomposition hermitian_eigen(const Matrix& h, const Tolerance& tol) {
  if (!is_hermitian(h, tol)) {
    throw NotHermitian("matrix is not Hermitian (deviation " +
                       std::to_string(hermitian_deviation(h)) + ")");
  }
  const Matrix sym = (h + h.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw Error("Hermitian eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix hermitian_power(const SpectralDecomposition& spectrum, cplx z) {
  const Index n = spectrum.values.size();
  Vector powered(n);
  for (Index k = 0; k < n; ++k) powered(k) = std::exp(z * std::log(spectrum.values(k)));
  return spectrum.vectors * powered.asDiagonal() * spectrum.vectors.adjoint();
}

Matrix hermitian_power(const Matrix& h, cplx z, const Tolerance& tol) {
  const auto spectrum = hermitian_eigen(h, tol);
  const double smallest = spectrum.values.minCoeff();
  if (smallest <= tol.abs()) {
    throw NotPositiveDefinite("eigenvalue " + std::to_string(smallest) +
                              " is not above tolerance " + std::to_string(tol.abs()));
  }
  return hermitian_power(spectrum, z);
}

std::vector<Matrix> spectral_projections(const Matrix& h, double relative_gap,
                                         const Tolerance& tol) {
  const auto spectrum = hermitian_eigen(h, tol);
  const Index n = spectrum.values.size();
  std::vector<Matrix> projections;
  Index start = 0;
  for (Index k = 1; k <= n; ++k) {
    const bool split =
        k == n || std::abs(spectrum.values(k) - spectrum.values(k - 1)) >
                      relative_gap * std::max(std::abs(spectrum.values(k)),
                                              std::abs(spectrum.values(k - 1)));
    if (!split) continue;
    const Matrix block = spectrum.vectors.middleCols(start, k - start);
    projections.push_back(block * block.adjoint());
    start = k;
  }
  return projections;
}

Matrix identity(Index n) { return Matrix::Identity(n, n); }

Matrix matrix_unit(Index n, Index i, Index j) {
  Matrix e = Matrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

std::vector<Matrix> matrix_units(Index n) {
  std::vector<Matrix> units;
  units.reserve(static_cast<std::size_t>(n * n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) units.push_back(matrix_unit(n, i, j));
  }
  return units;
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Index n) {
  if (v.size() != n * n) throw DimensionMismatch("unvec: length is not n^2");
  return Eigen::Map<const Matrix>(v.data(), n, n);
}

cplx hs_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch("Hilbert-Schmidt inner product of differently shaped matrices");
  }
  return kernels::hs_inner(entries(a), entries(b));
}

// max(x, 0) rather than max(0, x) so a NaN propagates instead of reading as zero.
double hs_norm(const Matrix& a) { return std::sqrt(std::max(hs_inner(a, a).real(), 0.0)); }

}  // namespace quasi
