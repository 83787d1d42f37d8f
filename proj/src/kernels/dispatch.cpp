#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "leoipac/kernels/kernels.hpp"

namespace leoipac::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(LEOIPAC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  const char* env = std::getenv("LEOIPAC_SIMD");
  const std::string pick = env ? env : "auto";
  if (pick == "scalar") return Isa::Scalar;
  if (cpu_has_avx2()) return Isa::Avx2;
  return Isa::Scalar;
}

std::atomic<int>& current() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

}  // namespace

bool isa_supported(Isa isa) {
  return isa == Isa::Scalar || (isa == Isa::Avx2 && cpu_has_avx2());
}

std::string isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa active_isa() { return static_cast<Isa>(current().load(std::memory_order_relaxed)); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) throw std::invalid_argument("kernel variant not supported: " + isa_name(isa));
  current().store(static_cast<int>(isa), std::memory_order_relaxed);
}

cd cdot(const cd* a, const cd* b, std::size_t n) {
#if defined(LEOIPAC_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::cdot(a, b, n);
#endif
  return scalar::cdot(a, b, n);
}

double wdot_re(const cd* a, const cd* b, const double* w, std::size_t n) {
#if defined(LEOIPAC_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::wdot_re(a, b, w, n);
#endif
  return scalar::wdot_re(a, b, w, n);
}

void real_gram(const cd* d, std::size_t n, std::size_t m, const double* w, double* out) {
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t l = k; l < m; ++l) {
      const double v = wdot_re(d + k * n, d + l * n, w, n);
      out[k + l * m] = v;
      out[l + k * m] = v;
    }
  }
}

void tone_stats(const cd* y, const cd* h, const double* w, std::size_t k, std::size_t s,
                double* a, cd* b, double* c) {
#if defined(LEOIPAC_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::tone_stats(y, h, w, k, s, a, b, c);
#endif
  scalar::tone_stats(y, h, w, k, s, a, b, c);
}

}  // namespace leoipac::kernels
