#pragma once

// Reduction kernels over interleaved complex<double> buffers.
//
// Every verification predicate in the library bottoms out in one of these
// loops (max-entry deviation, max-entry norm, Hilbert-Schmidt inner product).
// Each kernel has a scalar reference in quasi::kernels::scalar and, where the
// build supports it, an AVX2 variant in quasi::kernels::avx2. The free
// functions in quasi::kernels dispatch to the best variant the running CPU
// supports; QUASI_KERNELS=scalar in the environment pins the reference path.
//
// max_abs_diff and max_abs are bit-identical across variants (same per-entry
// arithmetic, max is order independent). hs_inner sums in a different order
// on the SIMD path and agrees with the reference to rounding.

#include <complex>
#include <span>
#include <string_view>

namespace quasi::kernels {

using cplx = std::complex<double>;

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);

/// max_k |a_k - b_k|. Spans must have equal length.
double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b);

/// max_k |a_k|.
double max_abs(std::span<const cplx> a);

/// sum_k conj(a_k) b_k. Spans must have equal length.
cplx hs_inner(std::span<const cplx> a, std::span<const cplx> b);

Backend active_backend();
bool backend_available(Backend b);

/// Pins the dispatch target. Throws quasi::Error if the CPU or build lacks it.
void select_backend(Backend b);

namespace scalar {
double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b);
double max_abs(std::span<const cplx> a);
cplx hs_inner(std::span<const cplx> a, std::span<const cplx> b);
}  // namespace scalar

#if defined(QUASI_HAVE_AVX2)
namespace avx2 {
double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b);
double max_abs(std::span<const cplx> a);
cplx hs_inner(std::span<const cplx> a, std::span<const cplx> b);
}  // namespace avx2
#endif

}  // namespace quasi::kernels
