#include <cmath>

#include <gtest/gtest.h>

#include "leoipac/constellation.hpp"

using namespace leoipac;

TEST(Constellation, UnitPowerZeroMean) {
  for (auto m : {Modulation::Bpsk, Modulation::Qpsk, Modulation::Psk8, Modulation::Psk16}) {
    const auto c = make_constellation(m);
    ASSERT_EQ(c.size(), std::size_t{1} << c.bits_per_symbol);
    cd sum = 0.0;
    double power = 0.0;
    for (const cd& p : c.points) {
      sum += p;
      power += std::norm(p);
    }
    EXPECT_LT(std::abs(sum), 1e-12);
    EXPECT_NEAR(power / c.size(), 1.0, 1e-12);
    EXPECT_NEAR(c.max_power(), 1.0, 1e-12);
  }
}

TEST(Constellation, GrayNeighbours) {
  const auto c = make_constellation(Modulation::Psk16);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(bit_errors(c.labels[i], c.labels[(i + 1) % c.size()]), 1);
  }
}

TEST(Demap, SixteenPskExample) {
  const auto c = make_constellation(Modulation::Psk16);
  EXPECT_EQ(demap(std::polar(1.0, kTwoPi / 16 * 3.4), c).index, 3);
  EXPECT_EQ(demap(std::polar(0.2, kTwoPi / 16 * 3.6), c).index, 4);
  EXPECT_EQ(demap(cd(1, 0), c).index, 0);
}

TEST(Demap, TiesGoToLowestIndex) {
  const auto c = make_constellation(Modulation::Qpsk);
  EXPECT_EQ(demap(cd(0, 0), c).index, 0);
  EXPECT_EQ(demap(std::polar(1.0, kPi / 4), c).index, 0);
}

TEST(Demap, BitsString) {
  const auto c = make_constellation(Modulation::Psk8);
  const auto d = demap(c.points[5], c);
  EXPECT_EQ(d.index, 5);
  EXPECT_EQ(d.label, 5u ^ (5u >> 1));
  EXPECT_EQ(d.bits, "111");
  EXPECT_EQ(bit_errors(0b101, 0b010), 3);
}
