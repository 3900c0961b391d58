#include <algorithm>
#include <cmath>
#include <limits>

#include "quasi/kernels.hpp"

namespace quasi::kernels::scalar {

// |z|^2 is formed as re*re + im*im and the square root is taken once at the
// end; the AVX2 variant performs the identical operations. A NaN anywhere
// makes the result +inf so a broken operand can never read as "close".

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double best = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double dr = a[k].real() - b[k].real();
    const double di = a[k].imag() - b[k].imag();
    const double sq = dr * dr + di * di;
    if (std::isnan(sq)) return std::numeric_limits<double>::infinity();
    best = std::max(best, sq);
  }
  return std::sqrt(best);
}

double max_abs(std::span<const cplx> a) {
  double best = 0.0;
  for (const cplx& z : a) {
    const double sq = z.real() * z.real() + z.imag() * z.imag();
    if (std::isnan(sq)) return std::numeric_limits<double>::infinity();
    best = std::max(best, sq);
  }
  return std::sqrt(best);
}

cplx hs_inner(std::span<const cplx> a, std::span<const cplx> b) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    re += a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
    im += a[k].real() * b[k].imag() - a[k].imag() * b[k].real();
  }
  return {re, im};
}

}  // namespace quasi::kernels::scalar
