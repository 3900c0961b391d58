#pragma once

// Antilinear operators on C^d stored as a matrix M acting on conjugated
// coordinates: A v = M conj(v). Compositions with linear maps and with each
// other stay in this form, so S, F and J never leave exact matrix algebra.

#include "quasi/linalg.hpp"

namespace quasi {

struct Antilinear {
  Matrix m;

  Vector apply(const Vector& v) const { return m * v.conjugate(); }
};

/// L after A.
inline Antilinear compose(const Matrix& l, const Antilinear& a) { return {l * a.m}; }
/// A after L.
inline Antilinear compose(const Antilinear& a, const Matrix& l) { return {a.m * l.conjugate()}; }
/// A1 after A2 is linear.
inline Matrix compose(const Antilinear& a1, const Antilinear& a2) { return a1.m * a2.m.conjugate(); }

/// The antilinear adjoint: <A* x, y> = <A y, x>.
inline Antilinear adjoint(const Antilinear& a) { return {a.m.transpose()}; }

/// The antilinear map with A v_k = w_k for the columns of an invertible V.
/// Throws DimensionMismatch, or NotFaithful when V is singular.
Antilinear antilinear_from_action(const Matrix& v, const Matrix& w, const Tolerance& tol = {});

/// A = J |A| with |A| = (A* A)^{1/2} positive and J antiunitary.
struct AntilinearPolar {
  Antilinear j;
  /// A* A.
  Matrix delta;
};

/// Throws NotPositiveDefinite when A is not invertible.
AntilinearPolar polar_decomposition(const Antilinear& a, const Tolerance& tol = {});

}  // namespace quasi
