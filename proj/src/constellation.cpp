#include "leoipac/constellation.hpp"

#include <bit>

namespace leoipac {

double Constellation::max_power() const {
  double m = 0.0;
  for (const cd& p : points) m = std::max(m, std::norm(p));
  return m;
}

Constellation make_constellation(Modulation m) {
  int order = 2;
  switch (m) {
    case Modulation::Bpsk: order = 2; break;
    case Modulation::Qpsk: order = 4; break;
    case Modulation::Psk8: order = 8; break;
    case Modulation::Psk16: order = 16; break;
  }
  Constellation c;
  c.modulation = m;
  c.bits_per_symbol = std::countr_zero(static_cast<unsigned>(order));
  for (int i = 0; i < order; ++i) {
    cd p = std::polar(1.0, kTwoPi * i / order);
    // Snap round-off so that e.g. BPSK is exactly {1, -1}.
    if (std::abs(p.real()) < 1e-15) p.real(0.0);
    if (std::abs(p.imag()) < 1e-15) p.imag(0.0);
    c.points.push_back(p);
    c.labels.push_back(static_cast<unsigned>(i ^ (i >> 1)));
  }
  return c;
}

Demapped demap(cd z, const Constellation& c) {
  int best = 0;
  double best_d = std::norm(z - c.points[0]);
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    const double d = std::norm(z - c.points[i]);
    if (d < best_d - 1e-12 * (1.0 + best_d)) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  Demapped out;
  out.index = best;
  out.label = c.labels[static_cast<std::size_t>(best)];
  for (int b = c.bits_per_symbol - 1; b >= 0; --b) out.bits.push_back(((out.label >> b) & 1u) ? '1' : '0');
  return out;
}

int bit_errors(unsigned a, unsigned b) { return std::popcount(a ^ b); }

}  // namespace leoipac
