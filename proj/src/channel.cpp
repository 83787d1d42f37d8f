#include "leoipac/channel.hpp"

#include <algorithm>
#include <cmath>

#include "leoipac/errors.hpp"

namespace leoipac {

namespace {

VectorXcd phase_ramp(double phi, int m) {
  VectorXcd v(m);
  for (int i = 0; i < m; ++i) v(i) = std::polar(1.0, -kTwoPi * phi * i);
  return v;
}

VectorXcd kron(const VectorXcd& a, const VectorXcd& b) {
  VectorXcd out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

}  // namespace

VectorXcd array_response(double az, double el, int mh, int mv, double spacing) {
  if (mh < 1 || mv < 1) throw DimensionMismatch("array dimensions must be positive");
  const double phi_h = spacing * std::cos(az) * std::cos(el);
  const double phi_v = spacing * std::sin(az) * std::cos(el);
  return kron(phase_ramp(phi_h, mh), phase_ramp(phi_v, mv));
}

VectorXcd array_response(const LinkGeometry& g, const ScenarioConfig& config) {
  return array_response(g.aod_az, g.aod_el, config.scenario.array_horizontal,
                        config.scenario.array_vertical, config.scenario.antenna_spacing);
}

ArrayDerivatives array_response_derivatives(double az, double el, int mh, int mv,
                                            double spacing) {
  ArrayDerivatives d;
  d.a = array_response(az, el, mh, mv, spacing);
  const double ca = std::cos(az), sa = std::sin(az), ce = std::cos(el), se = std::sin(el);
  const double dh_az = -spacing * sa * ce, dv_az = spacing * ca * ce;
  const double dh_el = -spacing * ca * se, dv_el = -spacing * sa * se;
  d.d_az.resize(d.a.size());
  d.d_el.resize(d.a.size());
  for (int ih = 0; ih < mh; ++ih) {
    for (int iv = 0; iv < mv; ++iv) {
      const Index m = static_cast<Index>(ih) * mv + iv;
      const cd f = -kTwoPi * kJ * d.a(m);
      d.d_az(m) = f * (dh_az * ih + dv_az * iv);
      d.d_el(m) = f * (dh_el * ih + dv_el * iv);
    }
  }
  return d;
}

FadingBudget large_scale_fading(double distance, double elevation, const ScenarioConfig& config,
                                double shadow_draw) {
  if (!(distance > 0.0)) throw DegenerateGeometry("link distance must be positive");
  const double fc_ghz = config.scenario.carrier_frequency / 1e9;
  const auto& ch = config.channel;
  FadingBudget b;
  b.fs_db = 20.0 * std::log10(distance) + 20.0 * std::log10(fc_ghz) + 32.45;
  const double elev = std::max(elevation, 1e-6);
  const double spread = std::max(0.0, ch.shadow_v_sigma + ch.shadow_v_theta * std::log10(elev));
  b.shadow_draw = shadow_draw;
  b.sf_db = shadow_draw * spread;
  b.cl_db = 0.0;
  b.ab_db = ch.atmospheric_loss_db;
  b.sc_db = 0.0;  // negligible above 6 GHz, not modelled below
  b.beta = std::pow(10.0, -b.total_db() / 10.0);
  return b;
}

FadingBudget large_scale_fading(const LinkGeometry& g, const ScenarioConfig& config,
                                RngStream& rng) {
  return large_scale_fading(g.distance, g.elevation, config, rng.normal());
}

std::vector<double> tap_delays(const ScenarioConfig& config) {
  const int P = config.channel.num_paths;
  const double step = 1.0 / (config.scenario.num_subcarriers * config.scenario.subcarrier_spacing);
  std::vector<double> d(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) d[static_cast<std::size_t>(p)] = p * step;
  return d;
}

PathParams make_path_params(const LinkGeometry& g, const ScenarioConfig& config, RngStream& rng) {
  const int P = config.channel.num_paths;
  PathParams path;
  path.rician_factor = config.channel.rician_factor;
  path.rel_delay = tap_delays(config);
  for (int p = 0; p < P; ++p) {
    path.gains.push_back(p == 0 ? cd(1.0, 0.0) : rng.complex_normal(1.0));
    path.doppler.push_back(g.los_doppler);
    path.delay.push_back(g.los_delay + path.rel_delay[static_cast<std::size_t>(p)]);
  }
  return path;
}

VectorXcd sample_time_frequency_channel(const PathParams& path, const FadingBudget& fade,
                                        const VectorXcd& a, double t, int k,
                                        double subcarrier_spacing) {
  const std::size_t P = path.gains.size();
  if (path.doppler.size() != P || path.delay.size() != P || P == 0) {
    throw DimensionMismatch("path parameter lists disagree in length");
  }
  const double T = 1.0 / subcarrier_spacing;
  auto phase = [&](std::size_t p) {
    return std::polar(1.0, kTwoPi * (t * T * path.doppler[p] - k * subcarrier_spacing * path.delay[p]));
  };
  const double kappa = path.rician_factor;
  cd G = std::sqrt(kappa) * phase(0);
  if (P > 1) {
    cd nlos = 0.0;
    for (std::size_t p = 1; p < P; ++p) nlos += path.gains[p] * phase(p);
    G += std::sqrt(1.0 / static_cast<double>(P - 1)) * nlos;
  }
  return std::sqrt(fade.beta / (kappa + 1.0)) * G * a;
}

ArMatrices build_ar_matrices(const std::vector<TapLink>& links, const ScenarioConfig& config) {
  const int P = config.channel.num_paths;
  const double kappa = config.channel.rician_factor;
  const double eta = config.channel.decay_exponent;
  const double T = config.symbol_duration();
  const Index n = static_cast<Index>(links.size()) * P;
  ArMatrices ar;
  ar.num_paths = P;
  ar.f.resize(n);
  ar.g.resize(n);
  ar.stationary.resize(n);
  ar.los_power.resize(static_cast<Index>(links.size()));
  for (std::size_t s = 0; s < links.size(); ++s) {
    const double alpha = std::cyl_bessel_j(0.0, kTwoPi * std::abs(links[s].ut_doppler) * T);
    const double cs = links[s].beta * kappa / (kappa + 1.0);
    ar.los_power(static_cast<Index>(s)) = cs;
    const double innov = std::max(0.0, 1.0 - alpha * alpha);
    for (int p = 0; p < P; ++p) {
      const Index i = static_cast<Index>(s) * P + p;
      const double var = p == 0 ? cs : std::exp(-eta * p) * cs / kappa;
      ar.f(i) = alpha;
      ar.g(i) = std::sqrt(innov * var);
      ar.stationary(i) = var;
    }
  }
  return ar;
}

TapPrior tap_prior(const ArMatrices& ar, TapPriorMode mode) {
  TapPrior prior;
  const Index n = ar.size();
  prior.mean = VectorXcd::Zero(n);
  if (mode == TapPriorMode::Stationary) {
    prior.cov = ar.stationary.cast<cd>().asDiagonal();
  } else {
    prior.cov = ar.process_cov();
    for (Index s = 0; s < ar.los_power.size(); ++s) prior.mean(s * ar.num_paths) = ar.los_power(s);
  }
  return prior;
}

VectorXcd draw_taps(const TapPrior& prior, RngStream& rng) {
  const Index n = prior.mean.size();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(prior.cov);
  const MatrixXcd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  VectorXcd z(n);
  for (Index i = 0; i < n; ++i) z(i) = rng.complex_normal(1.0);
  return prior.mean + root * z;
}

VectorXcd evolve_taps(const VectorXcd& g, const ArMatrices& ar, RngStream& rng) {
  if (g.size() != ar.size()) throw DimensionMismatch("tap vector and AR model differ in size");
  VectorXcd out(g.size());
  for (Index i = 0; i < g.size(); ++i) out(i) = ar.f(i) * g(i) + ar.g(i) * rng.complex_normal(1.0);
  return out;
}

MatrixXcd dft_columns(int k, int p) {
  thread_local int cached_k = -1, cached_p = -1;
  thread_local MatrixXcd cached;
  if (k == cached_k && p == cached_p) return cached;
  std::vector<cd> twiddle(static_cast<std::size_t>(k));
  for (int m = 0; m < k; ++m) twiddle[static_cast<std::size_t>(m)] = std::polar(1.0, -kTwoPi * m / k);
  MatrixXcd q(k, p);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < p; ++c)
      q(r, c) = twiddle[static_cast<std::size_t>((static_cast<long>(r) * c) % k)];
  cached_k = k;
  cached_p = p;
  cached = q;
  return q;
}

VectorXcd reconstruct_frequency_channel(const VectorXcd& taps, const std::vector<double>& rel_delay,
                                        const VectorXcd& a, int k, double subcarrier_spacing) {
  if (static_cast<std::size_t>(taps.size()) != rel_delay.size()) {
    throw DimensionMismatch("tap count and delay count differ");
  }
  cd gain = 0.0;
  for (Index p = 0; p < taps.size(); ++p) {
    gain += taps(p) * std::polar(1.0, -kTwoPi * k * subcarrier_spacing * rel_delay[static_cast<std::size_t>(p)]);
  }
  return gain * a;
}

VectorXcd tap_frequency_response(const VectorXcd& taps, const std::vector<double>& rel_delay,
                                 int num_subcarriers, double subcarrier_spacing) {
  if (static_cast<std::size_t>(taps.size()) != rel_delay.size()) {
    throw DimensionMismatch("tap count and delay count differ");
  }
  VectorXcd h = VectorXcd::Zero(num_subcarriers);
  for (int k = 0; k < num_subcarriers; ++k) {
    for (Index p = 0; p < taps.size(); ++p) {
      h(k) += taps(p) * std::polar(1.0, -kTwoPi * k * subcarrier_spacing * rel_delay[static_cast<std::size_t>(p)]);
    }
  }
  return h;
}

}  // namespace leoipac
