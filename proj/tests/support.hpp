#pragma once

// Random inputs and independent oracles for the test binaries. Nothing here
// calls the library's spectral code: powers go through Eigen's matrix
// exponential/logarithm and span residuals through a least-squares solve.

#include <cmath>
#include <random>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "quasi/linalg.hpp"

namespace testing {

using quasi::cplx;
using quasi::Index;
using quasi::Matrix;

inline Matrix random_gaussian(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = cplx(nd(rng), nd(rng));
  return m;
}

inline Matrix random_hermitian(Index n, std::mt19937_64& rng) {
  const Matrix g = random_gaussian(n, rng);
  return (g + g.adjoint()) / 2.0;
}

// exp(iH), no QR involved
inline Matrix random_unitary(Index n, std::mt19937_64& rng) {
  const Matrix h = random_hermitian(n, rng);
  return Matrix(quasi::kI * h).exp();
}

inline Matrix random_hpd(Index n, std::mt19937_64& rng, double floor = 0.2) {
  const Matrix g = random_gaussian(n, rng);
  return g * g.adjoint() + floor * Matrix::Identity(n, n);
}

inline Matrix random_density(Index n, std::mt19937_64& rng) {
  const Matrix h = random_hpd(n, rng);
  return h / h.trace().real();
}

// h^z = exp(z log h)
inline Matrix oracle_power(const Matrix& h, cplx z) {
  const Matrix l = h.log();
  return Matrix(z * l).exp();
}

// HS distance from x to span(elements), by least squares on the vectorised elements.
inline double oracle_span_residual(const std::vector<Matrix>& elements, const Matrix& x) {
  if (elements.empty()) return x.norm();
  const Index m = x.rows();
  Matrix a(m * m, static_cast<Index>(elements.size()));
  for (std::size_t k = 0; k < elements.size(); ++k)
    a.col(static_cast<Index>(k)) = Eigen::Map<const Eigen::VectorXcd>(elements[k].data(), m * m);
  const Eigen::VectorXcd b = Eigen::Map<const Eigen::VectorXcd>(x.data(), m * m);
  const Eigen::VectorXcd c = a.completeOrthogonalDecomposition().solve(b);
  return (a * c - b).norm();
}

inline Matrix diag2(cplx a, cplx b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

inline Matrix pauli_x() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = cplx(0.0, -1.0);
  m(1, 0) = cplx(0.0, 1.0);
  return m;
}

inline Matrix pauli_z() { return diag2(1.0, -1.0); }

inline Matrix rotation(double theta) {
  Matrix r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing
