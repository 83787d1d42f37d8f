// Built with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "leoipac/kernels/kernels.hpp"

namespace leoipac::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Even lanes minus odd lanes.
inline double halt(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  return (t[0] + t[2]) - (t[1] + t[3]);
}

inline __m256d widen_pairs(const double* w) {
  // (w0, w1) -> (w0, w0, w1, w1)
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(w)), 0x50);
}

}  // namespace

cd cdot(const cd* a, const cd* b, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  __m256d re = _mm256_setzero_pd();
  __m256d im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    re = _mm256_fmadd_pd(va, vb, re);
    im = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0x5), im);
  }
  double r = hsum(re);
  double m = halt(im);
  for (; i < n; ++i) {
    r += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    m += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {r, m};
}

double wdot_re(const cd* a, const cd* b, const double* w, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d wa = _mm256_mul_pd(widen_pairs(w + i), _mm256_loadu_pd(pa + 2 * i));
    acc = _mm256_fmadd_pd(wa, _mm256_loadu_pd(pb + 2 * i), acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += w[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  return r;
}

void tone_stats(const cd* y, const cd* h, const double* w, std::size_t k, std::size_t s,
                double* a, cd* b, double* c) {
  const double* py = reinterpret_cast<const double*>(y);
  const double* ph = reinterpret_cast<const double*>(h);
  std::size_t t = 0;
  for (; t + 2 <= k; t += 2) {
    __m256d acc_a = _mm256_setzero_pd();
    __m256d acc_c = _mm256_setzero_pd();
    __m256d acc_br = _mm256_setzero_pd();
    __m256d acc_bi = _mm256_setzero_pd();
    for (std::size_t j = 0; j < s; ++j) {
      const __m256d wv = _mm256_set1_pd(w[j]);
      const __m256d vy = _mm256_loadu_pd(py + 2 * (j * k + t));
      const __m256d vh = _mm256_loadu_pd(ph + 2 * (j * k + t));
      acc_a = _mm256_fmadd_pd(wv, _mm256_mul_pd(vy, vy), acc_a);
      acc_c = _mm256_fmadd_pd(wv, _mm256_mul_pd(vh, vh), acc_c);
      acc_br = _mm256_fmadd_pd(wv, _mm256_mul_pd(vh, vy), acc_br);
      acc_bi = _mm256_fmadd_pd(wv, _mm256_mul_pd(vh, _mm256_permute_pd(vy, 0x5)), acc_bi);
    }
    alignas(32) double ta[4], tc[4], tr[4], ti[4];
    _mm256_store_pd(ta, acc_a);
    _mm256_store_pd(tc, acc_c);
    _mm256_store_pd(tr, acc_br);
    _mm256_store_pd(ti, acc_bi);
    a[t] = ta[0] + ta[1];
    a[t + 1] = ta[2] + ta[3];
    c[t] = tc[0] + tc[1];
    c[t + 1] = tc[2] + tc[3];
    b[t] = {tr[0] + tr[1], ti[0] - ti[1]};
    b[t + 1] = {tr[2] + tr[3], ti[2] - ti[3]};
  }
  if (t < k) {
    // Odd tail: one tone, done in scalar form.
    double aa = 0.0, cc = 0.0, br = 0.0, bi = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      const cd yy = y[j * k + t];
      const cd hh = h[j * k + t];
      aa += w[j] * std::norm(yy);
      cc += w[j] * std::norm(hh);
      br += w[j] * (hh.real() * yy.real() + hh.imag() * yy.imag());
      bi += w[j] * (hh.real() * yy.imag() - hh.imag() * yy.real());
    }
    a[t] = aa;
    b[t] = {br, bi};
    c[t] = cc;
  }
}

}  // namespace leoipac::kernels::avx2
