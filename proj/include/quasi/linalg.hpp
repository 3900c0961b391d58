#pragma once

// Dense complex matrix numerics shared by every module: the tolerance policy,
// max-entry comparisons, Hermitian spectral decomposition and the matrix
// functions built on it.

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

namespace quasi {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr cplx kI{0.0, 1.0};

/// Comparison threshold: abs + rel * max(|A|, |B|) in the max-entry norm.
class Tolerance {
 public:
  Tolerance() = default;
  /// Throws InvalidParams unless abs > 0 and rel >= 0.
  Tolerance(double abs, double rel);

  double abs() const { return abs_; }
  double rel() const { return rel_; }
  double threshold(double scale_a, double scale_b) const;

  /// Same abs, rel scaled; used by checks whose natural scale is larger.
  Tolerance with_abs(double abs) const { return Tolerance(abs, rel_); }

 private:
  double abs_ = 1e-9;
  double rel_ = 1e-9;
};

struct Comparison {
  bool equal = true;
  double deviation = 0.0;
  double threshold = 0.0;
};

double max_entry_norm(const Matrix& m);
double max_entry_deviation(const Matrix& a, const Matrix& b);

/// Throws DimensionMismatch when shapes differ.
Comparison approx_equal(const Matrix& a, const Matrix& b, const Tolerance& tol = {});

double hermitian_deviation(const Matrix& m);
double unitary_deviation(const Matrix& m);
bool is_hermitian(const Matrix& m, const Tolerance& tol = {});
bool is_unitary(const Matrix& m, const Tolerance& tol = {});

struct OperatorFlags {
  bool hermitian = false;
  bool positive_definite = false;
  bool unitary = false;
};

/// A square complex matrix with flags that were verified when they were set.
class Operator {
 public:
  /// Throws DimensionMismatch for an empty or non-square matrix.
  explicit Operator(Matrix entries);

  static Operator hermitian(Matrix entries, const Tolerance& tol = {});
  static Operator positive_definite(Matrix entries, const Tolerance& tol = {});
  static Operator unitary(Matrix entries, const Tolerance& tol = {});

  Index dim() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }
  const OperatorFlags& flags() const { return flags_; }

 private:
  Matrix entries_;
  OperatorFlags flags_;
};

/// h = V diag(values) V^dagger, values ascending.
struct SpectralDecomposition {
  Eigen::VectorXd values;
  Matrix vectors;
};

/// Throws NotHermitian if max |h - h^dagger| exceeds tol.
SpectralDecomposition hermitian_eigen(const Matrix& h, const Tolerance& tol = {});

/// h^z = V diag(lambda_k^z) V^dagger for Hermitian positive definite h.
/// Throws NotHermitian, or NotPositiveDefinite when an eigenvalue is <= tol.abs().
Matrix hermitian_power(const Matrix& h, cplx z, const Tolerance& tol = {});

/// Same, reusing a decomposition that is already known to be positive.
Matrix hermitian_power(const SpectralDecomposition& spectrum, cplx z);

/// Orthogonal projections onto eigenspaces of h, eigenvalues grouped when
/// adjacent ones differ by at most relative_gap * max(|l_k|, |l_k+1|).
std::vector<Matrix> spectral_projections(const Matrix& h, double relative_gap = 1e-6,
                                         const Tolerance& tol = {});

Matrix identity(Index n);
Matrix matrix_unit(Index n, Index i, Index j);
/// All n^2 matrix units E_ij, row-major order (i outer).
std::vector<Matrix> matrix_units(Index n);
Matrix commutator(const Matrix& a, const Matrix& b);
Matrix kron(const Matrix& a, const Matrix& b);

/// Column-major flattening; vec(A X B) = (B^T kron A) vec(X).
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Index n);

/// Hilbert-Schmidt inner product Tr(a^dagger b).
cplx hs_inner(const Matrix& a, const Matrix& b);
double hs_norm(const Matrix& a);

inline std::span<const cplx> entries(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
inline std::span<const cplx> entries(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace quasi
