#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "leoipac/channel.hpp"
#include "leoipac/errors.hpp"

using namespace leoipac;

namespace {

// Two-sided KS statistic against N(0, var) and its asymptotic p-value.
double ks_pvalue(std::vector<double> x, double var) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 0.5 * std::erfc(-x[i] / std::sqrt(2.0 * var));
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int j = 1; j < 100; ++j) p += 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lam * lam);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST(Array, BoresightAllOnes) {
  const auto a = array_response(0.7, kPi / 2, 2, 2, 0.5);
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(a(i) - cd(1, 0)), 0.0, 1e-15);
}

TEST(Array, SingleElement) {
  const auto a = array_response(1.1, 0.3, 1, 1, 0.5);
  ASSERT_EQ(a.size(), 1);
  EXPECT_EQ(a(0), cd(1, 0));
}

TEST(Array, HandExample) {
  const auto a = array_response(0.0, 0.0, 2, 1, 0.5);
  EXPECT_NEAR(std::abs(a(0) - cd(1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a(1) - cd(-1, 0)), 0.0, 1e-15);
}

TEST(Array, KroneckerOrderVerticalFastest) {
  const int mh = 3, mv = 2;
  const double az = 0.4, el = 0.2;
  const auto a = array_response(az, el, mh, mv, 0.5);
  const auto ah = array_response(az, el, mh, 1, 0.5);
  for (int ih = 0; ih < mh; ++ih) {
    for (int iv = 0; iv < mv; ++iv) {
      const double phi_v = 0.5 * std::sin(az) * std::cos(el);
      const cd expect = ah(ih) * std::polar(1.0, -kTwoPi * phi_v * iv);
      EXPECT_NEAR(std::abs(a(ih * mv + iv) - expect), 0.0, 1e-14);
    }
  }
}

TEST(Array, UnitModulus) {
  RngStream rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto a = array_response(kTwoPi * rng.uniform(), kPi / 2 * rng.uniform(), 4, 3, 0.5);
    for (Index m = 0; m < a.size(); ++m) EXPECT_NEAR(std::abs(a(m)), 1.0, 1e-14);
  }
}

TEST(Array, DerivativesMatchFiniteDifference) {
  const double az = 0.3, el = 0.9, h = 1e-6;
  const auto d = array_response_derivatives(az, el, 4, 4, 0.5);
  const VectorXcd fd_az = (array_response(az + h, el, 4, 4, 0.5) - array_response(az - h, el, 4, 4, 0.5)) / (2 * h);
  const VectorXcd fd_el = (array_response(az, el + h, 4, 4, 0.5) - array_response(az, el - h, 4, 4, 0.5)) / (2 * h);
  EXPECT_LT((d.d_az - fd_az).norm(), 1e-6 * fd_az.norm());
  EXPECT_LT((d.d_el - fd_el).norm(), 1e-6 * fd_el.norm());
}

TEST(Fading, FreeSpaceExample) {
  ScenarioConfig c;
  const auto b = large_scale_fading(5e5, 0.8, c, 0.0);
  EXPECT_NEAR(b.fs_db, 168.51, 0.01);
  EXPECT_EQ(b.sf_db, 0.0);
  EXPECT_EQ(b.sc_db, 0.0);
  EXPECT_EQ(b.cl_db, 0.0);
  EXPECT_EQ(b.ab_db, c.channel.atmospheric_loss_db);
}

TEST(Fading, BudgetSumsToBeta) {
  ScenarioConfig c;
  RngStream rng(3);
  for (int i = 0; i < 50; ++i) {
    LinkGeometry g;
    g.distance = 5e5 + 1e6 * rng.uniform();
    g.elevation = 0.05 + 1.5 * rng.uniform();
    const auto b = large_scale_fading(g, c, rng);
    EXPECT_NEAR(-10 * std::log10(b.beta), b.total_db(), 1e-9);
  }
  EXPECT_THROW(large_scale_fading(0.0, 1.0, c, 0.0), DegenerateGeometry);
}

TEST(Channel, PureLosNorm) {
  ScenarioConfig c;
  LinkGeometry g;
  g.los_doppler = 1234.0;
  g.los_delay = 2e-3;
  c.channel.num_paths = 1;
  RngStream rng(1);
  const auto path = make_path_params(g, c, rng);
  FadingBudget fade;
  fade.beta = 1e-15;
  const auto a = array_response(0.2, 0.5, 4, 4, 0.5);
  // With one path only the LoS term remains; its norm is beta kappa/(kappa+1) M.
  const auto h = sample_time_frequency_channel(path, fade, a, 3.0, 7, c.scenario.subcarrier_spacing);
  const double kappa = c.channel.rician_factor;
  EXPECT_NEAR(h.squaredNorm(), fade.beta * kappa / (kappa + 1) * 16, 1e-27);
  g.los_doppler = 0.0;
  g.los_delay = 0.0;
  const auto p0 = make_path_params(g, c, rng);
  const auto h0 = sample_time_frequency_channel(p0, fade, a, 0.0, 0, c.scenario.subcarrier_spacing);
  EXPECT_LT((h0 - std::sqrt(fade.beta * kappa / (kappa + 1)) * a).norm(), 1e-20);
}

TEST(Channel, NormIndependentOfIndexing) {
  ScenarioConfig c;
  LinkGeometry g;
  g.los_doppler = 500.0;
  g.los_delay = 1e-3;
  RngStream rng(8);
  const auto path = make_path_params(g, c, rng);
  FadingBudget fade;
  fade.beta = 2.0;
  const auto a1 = array_response(0.3, 0.6, 4, 2, 0.5);
  VectorXcd a2(8);
  for (int ih = 0; ih < 4; ++ih)
    for (int iv = 0; iv < 2; ++iv) a2(iv * 4 + ih) = a1(ih * 2 + iv);
  const auto h1 = sample_time_frequency_channel(path, fade, a1, 2.0, 5, c.scenario.subcarrier_spacing);
  const auto h2 = sample_time_frequency_channel(path, fade, a2, 2.0, 5, c.scenario.subcarrier_spacing);
  EXPECT_NEAR(h1.norm() / a1.norm(), h2.norm() / a2.norm(), 1e-12);
}

TEST(Channel, MismatchedPathThrows) {
  PathParams p;
  p.gains = {1.0, 2.0};
  p.doppler = {0.0};
  p.delay = {0.0, 0.0};
  FadingBudget f;
  EXPECT_THROW(sample_time_frequency_channel(p, f, VectorXcd::Ones(2), 0, 0, 1.0), DimensionMismatch);
}

TEST(Channel, EnergyBookkeeping) {
  ScenarioConfig c;
  LinkGeometry g;
  g.los_doppler = 800.0;
  g.los_delay = 1.7e-3;
  FadingBudget fade;
  fade.beta = 1.0;
  const auto a = array_response(0.1, 0.4, 2, 2, 0.5);
  RngStream rng(21);
  double acc = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto path = make_path_params(g, c, rng);
    acc += sample_time_frequency_channel(path, fade, a, i % 7, i % 13, c.scenario.subcarrier_spacing).squaredNorm();
  }
  EXPECT_NEAR(acc / n, fade.beta * a.size(), 0.03 * fade.beta * a.size());
}

TEST(Channel, DftDuality) {
  ScenarioConfig c;
  c.scenario.num_subcarriers = 16;
  c.channel.num_paths = 4;
  const auto delays = tap_delays(c);
  EXPECT_EQ(delays[0], 0.0);
  EXPECT_TRUE(std::is_sorted(delays.begin(), delays.end()));
  RngStream rng(2);
  VectorXcd taps(4);
  for (Index p = 0; p < 4; ++p) taps(p) = rng.complex_normal();
  const auto h = tap_frequency_response(taps, delays, 16, c.scenario.subcarrier_spacing);
  VectorXcd padded = VectorXcd::Zero(16);
  padded.head(4) = taps;
  for (int k = 0; k < 16; ++k) {
    cd direct = 0.0;
    for (int n = 0; n < 16; ++n) direct += padded(n) * std::polar(1.0, -kTwoPi * k * n / 16.0);
    EXPECT_LE(std::abs(h(k) - direct), 1e-12 * std::max(1.0, std::abs(direct)));
  }
  EXPECT_LT((dft_columns(16, 4) * taps - h).norm(), 1e-12 * h.norm());
  const VectorXcd a = VectorXcd::Constant(3, cd(0.5, -0.5));
  for (int k = 0; k < 16; ++k) {
    EXPECT_LT((reconstruct_frequency_channel(taps, delays, a, k, c.scenario.subcarrier_spacing) - h(k) * a).norm(), 1e-12);
  }
}

// With Doppler compensated and the LoS delay removed, the sampled channel
// is the DFT of the scaled path gains.
TEST(Channel, TapReconstructionMatchesSampled) {
  ScenarioConfig c;
  c.scenario.num_subcarriers = 32;
  LinkGeometry g;
  RngStream rng(4);
  const auto path = make_path_params(g, c, rng);
  FadingBudget fade;
  fade.beta = 3.0;
  const double kappa = c.channel.rician_factor;
  const int P = c.channel.num_paths;
  VectorXcd taps(P);
  const double s = std::sqrt(fade.beta / (kappa + 1));
  taps(0) = s * std::sqrt(kappa) * path.gains[0];
  for (int p = 1; p < P; ++p) taps(p) = s * std::sqrt(1.0 / (P - 1)) * path.gains[p];
  const auto a = array_response(0.5, 0.5, 2, 2, 0.5);
  for (int k = 0; k < 32; ++k) {
    const auto direct = sample_time_frequency_channel(path, fade, a, 0.0, k, c.scenario.subcarrier_spacing);
    const auto rec = reconstruct_frequency_channel(taps, path.rel_delay, a, k, c.scenario.subcarrier_spacing);
    EXPECT_LE((direct - rec).norm(), 1e-9 * direct.norm());
  }
}

TEST(Ar, BesselExample) {
  ScenarioConfig c;
  const double T = c.symbol_duration();
  const auto ar = build_ar_matrices({TapLink{0.05 / T, 1.0}}, c);
  EXPECT_NEAR(ar.f(0), 0.9755, 5e-5);
  EXPECT_NEAR(ar.f(0), std::cyl_bessel_j(0.0, 0.1 * kPi), 1e-15);
  const auto neg = build_ar_matrices({TapLink{-0.05 / T, 1.0}}, c);
  EXPECT_EQ(neg.f(0), ar.f(0));
}

TEST(Ar, StaticChannel) {
  ScenarioConfig c;
  const auto ar = build_ar_matrices({TapLink{0.0, 2.0}, TapLink{0.0, 1.0}}, c);
  EXPECT_EQ(ar.size(), 2 * c.channel.num_paths);
  for (Index i = 0; i < ar.size(); ++i) {
    EXPECT_EQ(ar.f(i), 1.0);
    EXPECT_EQ(ar.g(i), 0.0);
  }
  const double kappa = c.channel.rician_factor;
  EXPECT_NEAR(ar.los_power(0), 2.0 * kappa / (kappa + 1), 1e-15);
}

TEST(Ar, FlatDecayEqualNlos) {
  ScenarioConfig c;
  c.channel.decay_exponent = 0.0;
  c.channel.rician_factor = 1.0;
  const auto ar = build_ar_matrices({TapLink{300.0, 1.0}}, c);
  for (int p = 2; p < c.channel.num_paths; ++p) EXPECT_EQ(ar.g(p), ar.g(1));
  for (Index i = 0; i < ar.size(); ++i) {
    EXPECT_GE(ar.f(i), 0.0);
    EXPECT_LE(ar.f(i), 1.0);
    EXPECT_NEAR(ar.g(i) * ar.g(i) / (1 - ar.f(i) * ar.f(i)), ar.stationary(i), 1e-12 * ar.stationary(i));
  }
}

TEST(Ar, NoiselessRecursion) {
  ArMatrices ar;
  ar.f = VectorXd::Constant(3, 0.8);
  ar.g = VectorXd::Zero(3);
  const VectorXcd g = VectorXcd::Constant(3, cd(1, 2));
  RngStream rng(1);
  EXPECT_EQ(evolve_taps(g, ar, rng), (0.8 * g).eval());
  EXPECT_THROW(evolve_taps(VectorXcd::Zero(2), ar, rng), DimensionMismatch);
}

TEST(Ar, MemorylessWhenFZero) {
  ArMatrices ar;
  ar.f = VectorXd::Zero(1);
  ar.g = VectorXd::Constant(1, 2.0);
  RngStream rng(7);
  double acc = 0.0;
  const int n = 20000;
  VectorXcd g = VectorXcd::Constant(1, cd(100, 0));
  for (int i = 0; i < n; ++i) {
    g = evolve_taps(g, ar, rng);
    acc += std::norm(g(0));
  }
  EXPECT_NEAR(acc / n, 4.0, 0.2);
}

TEST(Ar, StationaryVariance) {
  ArMatrices ar;
  ar.f = VectorXd::Constant(1, 0.9);
  ar.g = VectorXd::Constant(1, 0.5);
  RngStream rng(11);
  VectorXcd g = VectorXcd::Zero(1);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < 1000; ++i) g = evolve_taps(g, ar, rng);
  for (int i = 0; i < n; ++i) {
    g = evolve_taps(g, ar, rng);
    acc += std::norm(g(0));
  }
  const double expect = 0.25 / (1 - 0.81);
  EXPECT_NEAR(acc / n, expect, 0.05 * expect);
}

TEST(Ar, StationarityKs) {
  ScenarioConfig c;
  const auto ar = build_ar_matrices({TapLink{2000.0, 1.0}}, c);
  const auto prior = tap_prior(ar, TapPriorMode::Stationary);
  RngStream rng(19);
  std::vector<double> re, im;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto g0 = draw_taps(prior, rng);
    const auto g1 = evolve_taps(g0, ar, rng);
    re.push_back(g1(1).real());
    im.push_back(g1(1).imag());
  }
  EXPECT_GT(ks_pvalue(re, 0.5 * ar.stationary(1)), 0.01);
  EXPECT_GT(ks_pvalue(im, 0.5 * ar.stationary(1)), 0.01);
}

TEST(Ar, ProcessNoisePrior) {
  ScenarioConfig c;
  const auto ar = build_ar_matrices({TapLink{100.0, 1.0}, TapLink{200.0, 0.5}}, c);
  const auto prior = tap_prior(ar, TapPriorMode::ProcessNoise);
  const int P = c.channel.num_paths;
  EXPECT_EQ(prior.mean(0), cd(ar.los_power(0), 0));
  EXPECT_EQ(prior.mean(P), cd(ar.los_power(1), 0));
  EXPECT_EQ(prior.mean(1), cd(0, 0));
  EXPECT_TRUE(prior.cov.isApprox(ar.process_cov()));
}
