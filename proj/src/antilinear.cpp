#include "quasi/antilinear.hpp"

#include "quasi/errors.hpp"

namespace quasi {

Antilinear antilinear_from_action(const Matrix& v, const Matrix& w, const Tolerance& tol) {
  if (v.rows() != v.cols() || w.rows() != v.rows() || w.cols() != v.cols()) {
    throw DimensionMismatch("antilinear map needs square V and W of equal size");
  }
  // M conj(V) = W, solved as conj(V)^T M^T = W^T.
  const Matrix vc = v.conjugate();
  Eigen::FullPivLU<Matrix> lu(vc.transpose());
  lu.setThreshold(tol.abs());
  if (!lu.isInvertible()) throw NotFaithful("vectors defining an antilinear map are not a basis");
  return {lu.solve(w.transpose()).transpose()};
}

AntilinearPolar polar_decomposition(const Antilinear& a, const Tolerance& tol) {
  AntilinearPolar out;
  const Matrix delta = compose(adjoint(a), a);
  out.delta = (delta + delta.adjoint()) / 2.0;
  const auto spectrum = hermitian_eigen(out.delta, tol);
  if (spectrum.values(0) <= tol.abs()) {
    throw NotPositiveDefinite("antilinear operator is not invertible");
  }
  out.j = compose(a, hermitian_power(spectrum, -0.5));
  return out;
}

}  // namespace quasi
