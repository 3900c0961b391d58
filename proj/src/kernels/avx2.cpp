#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "quasi/kernels.hpp"

namespace quasi::kernels::avx2 {

namespace {

// One __m256d holds two interleaved complex values: [re0, im0, re1, im1].
constexpr std::size_t kPerVector = 2;

inline const double* raw(std::span<const cplx> s) {
  return reinterpret_cast<const double*>(s.data());
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(hi, lo);
  const __m128d sw = _mm_unpackhi_pd(m, m);
  return _mm_cvtsd_f64(_mm_max_sd(sw, m));
}

// [re0^2 + im0^2, (same), re1^2 + im1^2, (same)]
inline __m256d squared_modulus(__m256d d) {
  const __m256d sq = _mm256_mul_pd(d, d);
  return _mm256_hadd_pd(sq, sq);
}

inline __m256d unordered(__m256d v) { return _mm256_cmp_pd(v, v, _CMP_UNORD_Q); }

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  const double* pa = raw(a);
  const double* pb = raw(b);
  const std::size_t n = a.size();
  const std::size_t body = n - n % (2 * kPerVector);

  __m256d best0 = _mm256_setzero_pd();
  __m256d best1 = _mm256_setzero_pd();
  __m256d nan = _mm256_setzero_pd();
  for (std::size_t k = 0; k < body; k += 2 * kPerVector) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(pa + 2 * k), _mm256_loadu_pd(pb + 2 * k));
    const __m256d d1 =
        _mm256_sub_pd(_mm256_loadu_pd(pa + 2 * k + 4), _mm256_loadu_pd(pb + 2 * k + 4));
    const __m256d s0 = squared_modulus(d0);
    const __m256d s1 = squared_modulus(d1);
    nan = _mm256_or_pd(nan, _mm256_or_pd(unordered(s0), unordered(s1)));
    best0 = _mm256_max_pd(s0, best0);
    best1 = _mm256_max_pd(s1, best1);
  }
  if (_mm256_movemask_pd(nan) != 0) return kInf;
  double best = hmax(_mm256_max_pd(best0, best1));
  for (std::size_t k = body; k < n; ++k) {
    const double dr = a[k].real() - b[k].real();
    const double di = a[k].imag() - b[k].imag();
    const double sq = dr * dr + di * di;
    if (std::isnan(sq)) return kInf;
    best = std::max(best, sq);
  }
  return std::sqrt(best);
}

double max_abs(std::span<const cplx> a) {
  const double* pa = raw(a);
  const std::size_t n = a.size();
  const std::size_t body = n - n % (2 * kPerVector);

  __m256d best0 = _mm256_setzero_pd();
  __m256d best1 = _mm256_setzero_pd();
  __m256d nan = _mm256_setzero_pd();
  for (std::size_t k = 0; k < body; k += 2 * kPerVector) {
    const __m256d s0 = squared_modulus(_mm256_loadu_pd(pa + 2 * k));
    const __m256d s1 = squared_modulus(_mm256_loadu_pd(pa + 2 * k + 4));
    nan = _mm256_or_pd(nan, _mm256_or_pd(unordered(s0), unordered(s1)));
    best0 = _mm256_max_pd(s0, best0);
    best1 = _mm256_max_pd(s1, best1);
  }
  if (_mm256_movemask_pd(nan) != 0) return kInf;
  double best = hmax(_mm256_max_pd(best0, best1));
  for (std::size_t k = body; k < n; ++k) {
    const double sq = a[k].real() * a[k].real() + a[k].imag() * a[k].imag();
    if (std::isnan(sq)) return kInf;
    best = std::max(best, sq);
  }
  return std::sqrt(best);
}

cplx hs_inner(std::span<const cplx> a, std::span<const cplx> b) {
  const double* pa = raw(a);
  const double* pb = raw(b);
  const std::size_t n = a.size();
  const std::size_t body = n - n % kPerVector;

  // re_acc lanes: [ar*br, ai*bi, ...]   im_acc lanes: [ar*bi, ai*br, ...]
  __m256d re_acc = _mm256_setzero_pd();
  __m256d im_acc = _mm256_setzero_pd();
  for (std::size_t k = 0; k < body; k += kPerVector) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * k);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * k);
    const __m256d vb_swapped = _mm256_permute_pd(vb, 0b0101);
    re_acc = _mm256_add_pd(re_acc, _mm256_mul_pd(va, vb));
    im_acc = _mm256_add_pd(im_acc, _mm256_mul_pd(va, vb_swapped));
  }
  alignas(32) double r[4];
  alignas(32) double i[4];
  _mm256_store_pd(r, re_acc);
  _mm256_store_pd(i, im_acc);
  double re = (r[0] + r[1]) + (r[2] + r[3]);
  double im = (i[0] - i[1]) + (i[2] - i[3]);
  for (std::size_t k = body; k < n; ++k) {
    re += a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
    im += a[k].real() * b[k].imag() - a[k].imag() * b[k].real();
  }
  return {re, im};
}

}  // namespace quasi::kernels::avx2
