#include <atomic>
#include <cstdlib>
#include <string>

#include "quasi/errors.hpp"
#include "quasi/kernels.hpp"

namespace quasi::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(QUASI_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* forced = std::getenv("QUASI_KERNELS"); forced != nullptr) {
    if (std::string(forced) == "scalar") return Backend::scalar;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DimensionMismatch("kernel operands differ in length: " + std::to_string(a) + " vs " +
                            std::to_string(b));
  }
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

bool backend_available(Backend b) { return b == Backend::scalar || cpu_has_avx2(); }

void select_backend(Backend b) {
  if (!backend_available(b)) {
    throw Error("kernel backend '" + std::string(backend_name(b)) + "' is not available");
  }
  current().store(b, std::memory_order_relaxed);
}

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  require_same_length(a.size(), b.size());
#if defined(QUASI_HAVE_AVX2)
  if (active_backend() == Backend::avx2) return avx2::max_abs_diff(a, b);
#endif
  return scalar::max_abs_diff(a, b);
}

double max_abs(std::span<const cplx> a) {
#if defined(QUASI_HAVE_AVX2)
  if (active_backend() == Backend::avx2) return avx2::max_abs(a);
#endif
  return scalar::max_abs(a);
}

cplx hs_inner(std::span<const cplx> a, std::span<const cplx> b) {
  require_same_length(a.size(), b.size());
#if defined(QUASI_HAVE_AVX2)
  if (active_backend() == Backend::avx2) return avx2::hs_inner(a, b);
#endif
  return scalar::hs_inner(a, b);
}

}  // namespace quasi::kernels
