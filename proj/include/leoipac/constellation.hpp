#pragma once

#include <string>
#include <vector>

#include "leoipac/config.hpp"
#include "leoipac/types.hpp"

namespace leoipac {

/// Unit-power PSK alphabet, point i at angle 2 pi i / |R|, Gray label
/// i ^ (i >> 1).
struct Constellation {
  Modulation modulation = Modulation::Qpsk;
  std::vector<cd> points;
  std::vector<unsigned> labels;
  int bits_per_symbol = 0;

  std::size_t size() const { return points.size(); }
  double max_power() const;
};

Constellation make_constellation(Modulation m);

struct Demapped {
  int index = 0;
  unsigned label = 0;
  std::string bits;  // MSB first
};

/// Nearest point; ties go to the lowest index.
Demapped demap(cd z, const Constellation& c);

int bit_errors(unsigned a, unsigned b);

}  // namespace leoipac
