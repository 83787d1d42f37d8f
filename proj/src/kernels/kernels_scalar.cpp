#include "leoipac/kernels/kernels.hpp"

namespace leoipac::kernels::scalar {

cd cdot(const cd* a, const cd* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

double wdot_re(const cd* a, const cd* b, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += w[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  }
  return acc;
}

void tone_stats(const cd* y, const cd* h, const double* w, std::size_t k, std::size_t s,
                double* a, cd* b, double* c) {
  for (std::size_t t = 0; t < k; ++t) {
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

}  // namespace leoipac::kernels::scalar
