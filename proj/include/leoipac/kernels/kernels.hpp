#pragma once

#include <complex>
#include <cstddef>
#include <string>

namespace leoipac::kernels {

using cd = std::complex<double>;

enum class Isa { Scalar, Avx2 };

bool isa_supported(Isa isa);
std::string isa_name(Isa isa);

/// Variant used by the dispatching entry points. Chosen on first use from
/// the CPU and the LEOIPAC_SIMD environment variable (scalar|avx2|auto).
Isa active_isa();
/// Forces a variant; throws std::invalid_argument when the CPU lacks it.
void set_active_isa(Isa isa);

/// sum_i conj(a_i) b_i
cd cdot(const cd* a, const cd* b, std::size_t n);

/// sum_i w_i Re(conj(a_i) b_i)
double wdot_re(const cd* a, const cd* b, const double* w, std::size_t n);

/// out(k, l) = sum_i w_i Re(conj(d_ik) d_il) for an n x m column-major
/// matrix d; out is m x m column-major and symmetric.
void real_gram(const cd* d, std::size_t n, std::size_t m, const double* w, double* out);

/// Per-tone sufficient statistics over S branches for K x S column-major
/// y and h:
///   a_k = sum_s w_s |y_ks|^2, b_k = sum_s w_s conj(h_ks) y_ks,
///   c_k = sum_s w_s |h_ks|^2.
void tone_stats(const cd* y, const cd* h, const double* w, std::size_t k, std::size_t s,
                double* a, cd* b, double* c);

namespace scalar {
cd cdot(const cd* a, const cd* b, std::size_t n);
double wdot_re(const cd* a, const cd* b, const double* w, std::size_t n);
void tone_stats(const cd* y, const cd* h, const double* w, std::size_t k, std::size_t s,
                double* a, cd* b, double* c);
}  // namespace scalar

#if defined(LEOIPAC_HAVE_AVX2)
namespace avx2 {
cd cdot(const cd* a, const cd* b, std::size_t n);
double wdot_re(const cd* a, const cd* b, const double* w, std::size_t n);
void tone_stats(const cd* y, const cd* h, const double* w, std::size_t k, std::size_t s,
                double* a, cd* b, double* c);
}  // namespace avx2
#endif

}  // namespace leoipac::kernels
