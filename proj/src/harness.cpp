#include "leoipac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "leoipac/baselines.hpp"
#include "leoipac/errors.hpp"
#include "leoipac/linalg.hpp"
#include "leoipac/positioning.hpp"
#include "leoipac/rng.hpp"

namespace leoipac {

namespace {

struct SchemeName {
  std::string base;
  int pilot_multiplier = 1;
};

SchemeName split_scheme(const std::string& name) {
  SchemeName out;
  const auto at = name.find('@');
  out.base = name.substr(0, at);
  if (at != std::string::npos) {
    try {
      out.pilot_multiplier = std::stoi(name.substr(at + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad pilot multiplier in scheme '" + name + "'");
    }
    if (out.pilot_multiplier < 1) throw ConfigError("bad pilot multiplier in scheme '" + name + "'");
  }
  const auto known = known_schemes();
  if (std::find(known.begin(), known.end(), out.base) == known.end())
    throw ConfigError("unknown scheme '" + name + "'");
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

SlotOutcome score_slot(const Constellation& c, const std::vector<int>& truth,
                       const std::vector<int>& detected) {
  SlotOutcome o;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k] < 0) continue;
    o.bits += c.bits_per_symbol;
    o.bit_errors += bit_errors(c.labels[static_cast<std::size_t>(truth[k])],
                               c.labels[static_cast<std::size_t>(detected[k])]);
  }
  return o;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

std::vector<std::string> known_schemes() {
  return {"jude", "pilot_only_kf", "perfect_csi", "ml_with_position", "ml_without_position"};
}

TrialScene build_scene(const ScenarioConfig& config, std::uint64_t seed) {
  TrialScene sc;
  sc.config = config;
  sc.config.scenario.master_seed = seed;
  sc.seed = seed;
  const ScenarioConfig& cfg = sc.config;
  const int U = cfg.scenario.num_users;
  const int S = cfg.scenario.num_satellites;
  const int steps = cfg.harness.position_steps;
  const auto starts = ut_square_positions(cfg, U, cfg.scenario.user_separation);

  for (int u = 0; u < U; ++u) {
    const Trajectory traj = generate_user_trajectory(
        cfg, steps, derive_seed(seed, StreamPurpose::Trajectory, static_cast<std::uint64_t>(u)),
        starts[static_cast<std::size_t>(u)]);
    UserSetup us;
    us.truth = traj.truth.back();
    if (cfg.harness.truth_positions || steps == 0) {
      us.estimate = us.truth;
    } else {
      PositioningOptions opts;
      opts.steps = steps;
      opts.cache_fim = true;
      const PositioningResult r = run_positioning(
          traj, cfg, derive_seed(seed, StreamPurpose::Generic, 100, static_cast<std::uint64_t>(u)), opts);
      us.estimate = state_to_truth(r.final_state.mean);
    }
    us.pos_err = (us.estimate.position - us.truth.position).norm();
    us.vel_err = (us.estimate.velocity - us.truth.velocity).norm();
    sc.users.push_back(us);
  }

  sc.frame_time = cfg.scenario.epoch + steps * cfg.scenario.update_interval;
  sc.sats = propagate_constellation(cfg, sc.frame_time);
  for (int u = 0; u < U; ++u) {
    std::vector<LinkPair> row;
    std::vector<TapLink> lt, le;
    for (int s = 0; s < S; ++s) {
      LinkPair lp;
      lp.truth = link_geometry(sc.sats[static_cast<std::size_t>(s)], sc.users[static_cast<std::size_t>(u)].truth, cfg, s);
      lp.estimate = link_geometry(sc.sats[static_cast<std::size_t>(s)], sc.users[static_cast<std::size_t>(u)].estimate, cfg, s);
      RngStream shadow(derive_seed(seed, StreamPurpose::ShadowFading, 1000 + static_cast<std::uint64_t>(u),
                                   static_cast<std::uint64_t>(s)));
      lp.beta_true = large_scale_fading(lp.truth, cfg, shadow).beta;
      lp.beta_est = large_scale_fading(lp.estimate.distance, lp.estimate.elevation, cfg, 0.0).beta;
      lp.a_true = array_response(lp.truth, cfg);
      lp.a_est = array_response(lp.estimate, cfg);
      lt.push_back({lp.truth.ut_doppler, lp.beta_true * cfg.scenario.ut_power});
      le.push_back({lp.estimate.ut_doppler, lp.beta_est * cfg.scenario.ut_power});
      row.push_back(std::move(lp));
    }
    sc.links.push_back(std::move(row));
    sc.ar_true.push_back(build_ar_matrices(lt, cfg));
    sc.ar_est.push_back(build_ar_matrices(le, cfg));
  }
  return sc;
}

std::vector<bool> comb_pilot_mask(int num_subcarriers, int num_pilots) {
  if (num_pilots < 1 || num_pilots > num_subcarriers || num_subcarriers % num_pilots != 0)
    throw ConfigError("pilot count must divide the number of subcarriers");
  std::vector<bool> mask(static_cast<std::size_t>(num_subcarriers), false);
  const int step = num_subcarriers / num_pilots;
  for (int k = 0; k < num_subcarriers; k += step) mask[static_cast<std::size_t>(k)] = true;
  return mask;
}

FrameData simulate_frame(const TrialScene& scene, int num_pilots, bool unstructured) {
  const ScenarioConfig& cfg = scene.config;
  const int K = cfg.scenario.num_subcarriers;
  const int S = cfg.scenario.num_satellites;
  const int P = cfg.channel.num_paths;
  const int T = cfg.jude.slots;
  const int U = cfg.scenario.num_users;
  const Index M = cfg.num_antennas();
  const double sigma2 = cfg.scenario.noise_power;
  const Constellation con = make_constellation(cfg.scenario.modulation);
  const Constellation qpsk = make_constellation(Modulation::Qpsk);

  FrameData fr;
  fr.pilot_mask = comb_pilot_mask(K, num_pilots);
  std::vector<Index> tones;
  for (int k = 0; k < K; ++k)
    if (fr.pilot_mask[static_cast<std::size_t>(k)]) tones.push_back(k);

  fr.symbols.assign(static_cast<std::size_t>(U), {});
  fr.indices.assign(static_cast<std::size_t>(U), {});
  fr.taps.assign(static_cast<std::size_t>(U), {});
  for (int u = 0; u < U; ++u) {
    const auto uu = static_cast<std::uint64_t>(u);
    for (int t = 0; t < T; ++t) {
      const auto tt = static_cast<std::uint64_t>(t);
      RngStream data(derive_seed(scene.seed, StreamPurpose::Symbols, uu, tt));
      RngStream pil(derive_seed(scene.seed, StreamPurpose::Pilots, uu, tt));
      VectorXcd x(K);
      std::vector<int> idx(static_cast<std::size_t>(K));
      for (int k = 0; k < K; ++k) {
        const int i = data.uniform_int(0, static_cast<int>(con.size()) - 1);
        const int j = pil.uniform_int(0, 3);
        if (fr.pilot_mask[static_cast<std::size_t>(k)]) {
          x(k) = qpsk.points[static_cast<std::size_t>(j)];
          idx[static_cast<std::size_t>(k)] = -1;
        } else {
          x(k) = con.points[static_cast<std::size_t>(i)];
          idx[static_cast<std::size_t>(k)] = i;
        }
      }
      fr.symbols[static_cast<std::size_t>(u)].push_back(x);
      fr.indices[static_cast<std::size_t>(u)].push_back(std::move(idx));
    }
    RngStream tr(derive_seed(scene.seed, StreamPurpose::TapEvolution, uu));
    const ArMatrices& ar = scene.ar_true[static_cast<std::size_t>(u)];
    VectorXcd g = draw_taps(tap_prior(ar, TapPriorMode::Stationary), tr);
    for (int t = 0; t < T; ++t) {
      if (t > 0) g = evolve_taps(g, ar, tr);
      fr.taps[static_cast<std::size_t>(u)].push_back(g);
    }
  }

  const MatrixXcd q = dft_columns(K, P);
  auto grid = [&](int) {
    return std::vector<MatrixXcd>(static_cast<std::size_t>(T), MatrixXcd::Zero(K, S));
  };
  for (int u = 0; u < U; ++u) fr.mrc.push_back(grid(u));
  fr.has_unstructured = unstructured;
  if (unstructured) {
    for (int u = 0; u < U; ++u) {
      fr.free_y.push_back(grid(u));
      fr.free_heff.push_back(grid(u));
      fr.free_err.emplace_back(static_cast<std::size_t>(T), 0.0);
      fr.free_power.emplace_back(static_cast<std::size_t>(T), 0.0);
    }
  }

  std::vector<VectorXcd> resp(static_cast<std::size_t>(U));
  if (!unstructured) {
    // Combiner outputs only: the noise vector (w_u^H n)_u is drawn from its
    // exact joint law CN(0, sigma^2 W^H W) instead of per antenna.
    for (int s = 0; s < S; ++s) {
      MatrixXcd gram(U, U), cross(U, U);
      for (int u = 0; u < U; ++u)
        for (int v = 0; v < U; ++v) {
          const auto& lu = scene.links[static_cast<std::size_t>(u)][static_cast<std::size_t>(s)];
          const auto& lv = scene.links[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)];
          gram(u, v) = sigma2 * lu.a_est.dot(lv.a_est);
          cross(u, v) = lu.a_est.dot(lv.a_true);
        }
      const MatrixXcd root = hermitian_sqrt_clipped(gram);
      for (int t = 0; t < T; ++t) {
        RngStream nz(derive_seed(scene.seed, StreamPurpose::CombinedNoise, static_cast<std::uint64_t>(t),
                                 static_cast<std::uint64_t>(s)));
        MatrixXcd z(U, K);
        for (Index k = 0; k < K; ++k)
          for (Index u = 0; u < U; ++u) z(u, k) = nz.complex_normal(1.0);
        MatrixXcd sig(U, K);
        for (int v = 0; v < U; ++v) {
          const auto vv = static_cast<std::size_t>(v);
          const auto tt = static_cast<std::size_t>(t);
          sig.row(v) = ((q * fr.taps[vv][tt].segment(static_cast<Index>(s) * P, P))
                            .cwiseProduct(fr.symbols[vv][tt]))
                           .transpose();
        }
        const MatrixXcd out = cross * sig + root * z;
        for (int u = 0; u < U; ++u)
          fr.mrc[static_cast<std::size_t>(u)][static_cast<std::size_t>(t)].col(s) = out.row(u).transpose();
      }
    }
    return fr;
  }

  MatrixXcd y(M, K);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      RngStream nz(derive_seed(scene.seed, StreamPurpose::AntennaNoise, static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(s)));
      for (Index k = 0; k < K; ++k)
        for (Index m = 0; m < M; ++m) y(m, k) = nz.complex_normal(sigma2);
      for (int u = 0; u < U; ++u) {
        const auto& lk = scene.links[static_cast<std::size_t>(u)][static_cast<std::size_t>(s)];
        resp[static_cast<std::size_t>(u)] =
            q * fr.taps[static_cast<std::size_t>(u)][static_cast<std::size_t>(t)].segment(static_cast<Index>(s) * P, P);
        const VectorXcd tx = resp[static_cast<std::size_t>(u)].cwiseProduct(
            fr.symbols[static_cast<std::size_t>(u)][static_cast<std::size_t>(t)]);
        y.noalias() += lk.a_true * tx.transpose();
      }
      for (int u = 0; u < U; ++u) {
        const auto& lk = scene.links[static_cast<std::size_t>(u)][static_cast<std::size_t>(s)];
        fr.mrc[static_cast<std::size_t>(u)][static_cast<std::size_t>(t)].col(s) =
            (lk.a_est.adjoint() * y).transpose();
      }
      for (int u = 0; u < U; ++u) {
        const auto uu = static_cast<std::size_t>(u);
        const auto tt = static_cast<std::size_t>(t);
        const auto& lk = scene.links[uu][static_cast<std::size_t>(s)];
        MatrixXcd yp(M, static_cast<Index>(tones.size()));
        VectorXcd xp(static_cast<Index>(tones.size()));
        for (std::size_t i = 0; i < tones.size(); ++i) {
          yp.col(static_cast<Index>(i)) = y.col(tones[i]);
          xp(static_cast<Index>(i)) = fr.symbols[uu][tt](tones[i]);
        }
        const MatrixXcd h = ml_without_position(yp, tones, xp, K, P);
        for (Index k = 0; k < K; ++k) {
          const double nh = h.col(k).norm();
          const cd gk = resp[uu](k);
          if (nh > 0.0) {
            fr.free_y[uu][tt](k, s) = h.col(k).dot(y.col(k)) / nh;
            fr.free_heff[uu][tt](k, s) = nh;
          }
          fr.free_err[uu][tt] += (h.col(k) - gk * lk.a_true).squaredNorm();
          fr.free_power[uu][tt] += std::norm(gk) * lk.a_true.squaredNorm();
        }
      }
    }
  }
  return fr;
}

JudeProblem make_problem(const TrialScene& scene, const FrameData& frame, int u,
                         const RunningPriors* running) {
  const ScenarioConfig& cfg = scene.config;
  const int S = cfg.scenario.num_satellites;
  const int K = cfg.scenario.num_subcarriers;
  const int T = cfg.jude.slots;
  const int U = cfg.scenario.num_users;
  const auto uu = static_cast<std::size_t>(u);

  JudeProblem pb;
  pb.num_satellites = S;
  pb.num_subcarriers = K;
  pb.num_paths = cfg.channel.num_paths;
  pb.slots = T;
  pb.constellation = make_constellation(cfg.scenario.modulation);
  pb.pilot_mask = frame.pilot_mask;
  auto masked = [&](int who, int t) {
    VectorXcd p = VectorXcd::Zero(K);
    for (int k = 0; k < K; ++k)
      if (frame.pilot_mask[static_cast<std::size_t>(k)])
        p(k) = frame.symbols[static_cast<std::size_t>(who)][static_cast<std::size_t>(t)](k);
    return p;
  };
  for (int t = 0; t < T; ++t) pb.pilots.push_back(masked(u, t));
  pb.own_gains.resize(S);
  pb.noise_var.resize(S);
  for (int s = 0; s < S; ++s) {
    const double m = scene.links[uu][static_cast<std::size_t>(s)].a_est.squaredNorm();
    pb.own_gains(s) = m;
    pb.noise_var(s) = m * cfg.scenario.noise_power;
  }
  pb.ar = scene.ar_est[uu];
  pb.initial = tap_prior(pb.ar, cfg.jude.tap_prior);
  const bool use_running = running && cfg.jude.interferer_priors == InterfererPriorMode::Running;
  for (int t = 0; t < T; ++t) {
    std::vector<InterfererStats> row;
    for (int v = 0; v < U; ++v) {
      if (v == u) continue;
      const auto vv = static_cast<std::size_t>(v);
      InterfererStats it;
      it.gains.resize(S);
      for (int s = 0; s < S; ++s)
        it.gains(s) = scene.links[uu][static_cast<std::size_t>(s)].a_est.dot(
            scene.links[vv][static_cast<std::size_t>(s)].a_est);
      it.prior = use_running ? (*running)[vv][static_cast<std::size_t>(t)]
                             : tap_prior(scene.ar_est[vv], cfg.jude.tap_prior);
      it.pilots = masked(v, t);
      row.push_back(std::move(it));
    }
    pb.interferers.push_back(std::move(row));
  }
  pb.y = frame.mrc[uu];
  pb.em_iterations = cfg.jude.em_iterations;
  pb.em_tolerance = cfg.jude.em_tolerance;
  return pb;
}

RunningPriors running_priors(const TrialScene& scene, const FrameData& frame) {
  RunningPriors out;
  for (int u = 0; u < scene.config.scenario.num_users; ++u) {
    const JudeEstimate e = pilot_only_kf(make_problem(scene, frame, u));
    std::vector<TapPrior> row;
    for (std::size_t t = 0; t < e.taps.size(); ++t) row.push_back({e.taps[t], e.tap_covs[t]});
    out.push_back(std::move(row));
  }
  return out;
}

ChannelError tap_channel_error(const TrialScene& scene, int u, const VectorXcd& est_taps,
                               const VectorXcd& true_taps) {
  const ScenarioConfig& cfg = scene.config;
  const int P = cfg.channel.num_paths;
  const MatrixXcd q = dft_columns(cfg.scenario.num_subcarriers, P);
  ChannelError ce;
  for (int s = 0; s < cfg.scenario.num_satellites; ++s) {
    const auto& lk = scene.links[static_cast<std::size_t>(u)][static_cast<std::size_t>(s)];
    const double me = lk.a_est.squaredNorm(), mt = lk.a_true.squaredNorm();
    const cd cross = lk.a_est.dot(lk.a_true);
    const VectorXcd ge = q * est_taps.segment(static_cast<Index>(s) * P, P);
    const VectorXcd gt = q * true_taps.segment(static_cast<Index>(s) * P, P);
    for (Index k = 0; k < ge.size(); ++k) {
      // |ge a_est - gt a_true|^2 expanded
      const double e = me * std::norm(ge(k)) + mt * std::norm(gt(k)) -
                       2.0 * (std::conj(ge(k)) * gt(k) * cross).real();
      ce.error += std::max(0.0, e);
      ce.power += mt * std::norm(gt(k));
    }
  }
  return ce;
}

double nmse(const std::vector<VectorXcd>& est, const std::vector<VectorXcd>& truth) {
  if (est.size() != truth.size()) throw DimensionMismatch("nmse: shapes differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est[i].size() != truth[i].size()) throw DimensionMismatch("nmse: shapes differ");
    num += (est[i] - truth[i]).squaredNorm();
    den += truth[i].squaredNorm();
  }
  return num / den;
}

TrialOutcome run_trial(const TrialScene& scene, const std::vector<std::string>& schemes) {
  const ScenarioConfig& cfg = scene.config;
  const int U = cfg.scenario.num_users;
  const int T = cfg.jude.slots;
  const int S = cfg.scenario.num_satellites;
  const int P = cfg.channel.num_paths;
  const int K = cfg.scenario.num_subcarriers;

  std::map<int, bool> layouts;  // multiplier -> needs antenna-level estimate
  std::vector<SchemeName> parsed;
  for (const auto& n : schemes) {
    parsed.push_back(split_scheme(n));
    layouts[parsed.back().pilot_multiplier] |= parsed.back().base == "ml_without_position";
  }

  TrialOutcome out;
  const MatrixXcd q = dft_columns(K, P);
  for (const auto& [mult, unstructured] : layouts) {
    const FrameData fr = simulate_frame(scene, cfg.jude.num_pilots * mult, unstructured);
    RunningPriors running;
    if (cfg.jude.interferer_priors == InterfererPriorMode::Running) running = running_priors(scene, fr);
    for (int u = 0; u < U; ++u) {
      const auto uu = static_cast<std::size_t>(u);
      const JudeProblem pb = make_problem(scene, fr, u, running.empty() ? nullptr : &running);
      for (std::size_t i = 0; i < schemes.size(); ++i) {
        if (parsed[i].pilot_multiplier != mult) continue;
        const std::string& base = parsed[i].base;
        auto& slots = out[schemes[i]];
        slots.resize(static_cast<std::size_t>(U));
        std::vector<SlotOutcome>& res = slots[uu];
        res.assign(static_cast<std::size_t>(T), {});
        JudeEstimate est;
        if (base == "jude" || base == "pilot_only_kf") {
          est = base == "jude" ? jude_estimate(pb) : pilot_only_kf(pb);
          for (int t = 0; t < T; ++t) {
            const auto tt = static_cast<std::size_t>(t);
            res[tt] = score_slot(pb.constellation, fr.indices[uu][tt], est.detected[tt]);
            res[tt].channel = tap_channel_error(scene, u, est.taps[tt], fr.taps[uu][tt]);
            res[tt].em_iterations = est.em_iterations_used;
          }
        } else if (base == "ml_with_position") {
          std::vector<MatrixXcd> h;
          for (int t = 0; t < T; ++t) {
            est.taps.push_back(ml_with_position(pb, t));
            h.push_back(effective_channel(est.taps.back(), pb.own_gains, K, P));
          }
          detect_symbols(pb, h, est);
          for (int t = 0; t < T; ++t) {
            const auto tt = static_cast<std::size_t>(t);
            res[tt] = score_slot(pb.constellation, fr.indices[uu][tt], est.detected[tt]);
            res[tt].channel = tap_channel_error(scene, u, est.taps[tt], fr.taps[uu][tt]);
          }
        } else if (base == "perfect_csi") {
          std::vector<MatrixXcd> h;
          for (int t = 0; t < T; ++t) {
            MatrixXcd hh(K, S);
            for (int s = 0; s < S; ++s) {
              const auto& lk = scene.links[uu][static_cast<std::size_t>(s)];
              hh.col(s) = lk.a_est.dot(lk.a_true) *
                          (q * fr.taps[uu][static_cast<std::size_t>(t)].segment(static_cast<Index>(s) * P, P));
            }
            h.push_back(std::move(hh));
          }
          detect_symbols(pb, h, est);
          for (int t = 0; t < T; ++t) {
            const auto tt = static_cast<std::size_t>(t);
            res[tt] = score_slot(pb.constellation, fr.indices[uu][tt], est.detected[tt]);
            res[tt].channel = tap_channel_error(scene, u, fr.taps[uu][tt], fr.taps[uu][tt]);
            res[tt].channel.error = 0.0;
          }
        } else {  // ml_without_position
          JudeProblem free = pb;
          free.y = fr.free_y[uu];
          free.interferers.clear();
          free.noise_var = VectorXd::Constant(S, cfg.scenario.noise_power);
          detect_symbols(free, fr.free_heff[uu], est);
          for (int t = 0; t < T; ++t) {
            const auto tt = static_cast<std::size_t>(t);
            res[tt] = score_slot(pb.constellation, fr.indices[uu][tt], est.detected[tt]);
            res[tt].channel = {fr.free_err[uu][tt], fr.free_power[uu][tt]};
          }
        }
      }
    }
  }
  return out;
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (axes.empty()) throw ConfigError("sweep needs at least one axis");
  for (const auto& a : axes)
    if (a.values.empty()) throw ConfigError("sweep axis '" + a.name + "' has no values");
  if (schemes.empty()) throw ConfigError("sweep needs at least one scheme");
  for (const auto& s : schemes) split_scheme(s);
}

ExperimentSpec parse_experiment_spec(const std::string& ini_text, const ScenarioConfig& base) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(ini_text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("experiment spec: ") + e.what());
  }
  ExperimentSpec spec;
  spec.base = base;
  spec.schemes = {"jude", "pilot_only_kf", "perfect_csi", "ml_with_position", "ml_without_position"};
  const std::set<std::string> axes = {"ut_power_dbm", "pilot_count", "separation_m", "num_users"};
  for (const auto& [section, body] : tree) {
    if (section != "sweep") throw ConfigError("experiment spec: unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      const std::string value = node.get_value<std::string>();
      if (key == "trials") {
        try {
          spec.trials = std::stoi(value);
        } catch (const std::exception&) {
          throw ConfigError("experiment spec: trials must be an integer");
        }
      } else if (key == "schemes") {
        spec.schemes = split_list(value);
      } else if (axes.count(key)) {
        spec.axes.push_back({key, parse_number_list(value)});
      } else {
        throw ConfigError("experiment spec: unknown key '" + key + "'");
      }
    }
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path, const ScenarioConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment spec " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_spec(ss.str(), base);
}

ScenarioConfig apply_axis(const ScenarioConfig& base, const std::string& axis, double value) {
  ScenarioConfig c = base;
  if (axis == "ut_power_dbm") {
    c.scenario.ut_power = dbm_to_watts(value);
  } else if (axis == "pilot_count") {
    c.jude.num_pilots = static_cast<int>(std::lround(value));
  } else if (axis == "separation_m") {
    c.scenario.user_separation = value;
  } else if (axis == "num_users") {
    c.scenario.num_users = static_cast<int>(std::lround(value));
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
  c.validate();
  return c;
}

std::vector<MetricsRecord> compute_metrics(const std::string& axis, double value,
                                           const std::vector<std::string>& schemes,
                                           const std::vector<TrialRecord>& trials) {
  std::vector<MetricsRecord> out;
  double pos_ss = 0.0, vel_ss = 0.0;
  long n_users = 0;
  int used = 0, failed = 0;
  for (const auto& tr : trials) {
    if (tr.failed) {
      ++failed;
      continue;
    }
    ++used;
    for (std::size_t i = 0; i < tr.pos_err.size(); ++i) {
      pos_ss += tr.pos_err[i] * tr.pos_err[i];
      vel_ss += tr.vel_err[i] * tr.vel_err[i];
      ++n_users;
    }
  }
  for (const auto& name : schemes) {
    MetricsRecord r;
    r.axis = axis;
    r.value = value;
    r.scheme = name;
    r.trials_used = used;
    r.trials_failed = failed;
    r.position_rmse = n_users ? std::sqrt(pos_ss / static_cast<double>(n_users)) : 0.0;
    r.velocity_rmse = n_users ? std::sqrt(vel_ss / static_cast<double>(n_users)) : 0.0;
    double err = 0.0, pow = 0.0;
    std::vector<double> ber_t, nmse_t;
    for (const auto& tr : trials) {
      if (tr.failed) continue;
      const auto it = tr.outcome.find(name);
      if (it == tr.outcome.end()) continue;
      long e = 0, b = 0;
      double te = 0.0, tp = 0.0;
      for (const auto& ut : it->second)
        for (const auto& sl : ut) {
          e += sl.bit_errors;
          b += sl.bits;
          te += sl.channel.error;
          tp += sl.channel.power;
        }
      r.bit_errors += e;
      r.bits += b;
      err += te;
      pow += tp;
      if (b > 0) ber_t.push_back(static_cast<double>(e) / static_cast<double>(b));
      if (tp > 0.0) nmse_t.push_back(te / tp);
    }
    r.ber = r.bits ? static_cast<double>(r.bit_errors) / static_cast<double>(r.bits) : 0.0;
    r.ber_se = standard_error(ber_t);
    const double lin = pow > 0.0 ? err / pow : 0.0;
    // -300 dB stands in for an exact channel.
    r.nmse_db = 10.0 * std::log10(std::max(lin, 1e-30));
    r.nmse_se_db = lin > 0.0 ? 10.0 / std::log(10.0) * standard_error(nmse_t) / lin : 0.0;
    out.push_back(r);
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return derive_seed(master, StreamPurpose::Generic, static_cast<std::uint64_t>(trial));
}

TrialRecord run_trial_record(const ScenarioConfig& config, const std::vector<std::string>& schemes,
                             std::uint64_t seed) {
  TrialRecord rec;
  try {
    const TrialScene scene = build_scene(config, seed);
    rec.outcome = run_trial(scene, schemes);
    for (const auto& u : scene.users) {
      rec.pos_err.push_back(u.pos_err);
      rec.vel_err.push_back(u.vel_err);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    rec = TrialRecord{};
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

SweepResult run_sweep(const ExperimentSpec& spec, std::uint64_t master_seed, int jobs) {
  spec.validate();
  struct Point {
    std::string axis;
    double value;
    ScenarioConfig config;
  };
  std::vector<Point> points;
  for (const auto& a : spec.axes)
    for (double v : a.values) {
      Point p{a.name, v, apply_axis(spec.base, a.name, v)};
      for (const auto& s : spec.schemes)
        comb_pilot_mask(p.config.scenario.num_subcarriers,
                        p.config.jude.num_pilots * split_scheme(s).pilot_multiplier);
      points.push_back(std::move(p));
    }

  const std::size_t n_items = points.size() * static_cast<std::size_t>(spec.trials);
  std::vector<TrialRecord> results(n_items);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_items) return;
      const std::size_t p = i / static_cast<std::size_t>(spec.trials);
      const int trial = static_cast<int>(i % static_cast<std::size_t>(spec.trials));
      try {
        results[i] = run_trial_record(points[p].config, spec.schemes, trial_seed(master_seed, trial));
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        next = n_items;
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(n_items)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  SweepResult out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto first = results.begin() + static_cast<std::ptrdiff_t>(p * static_cast<std::size_t>(spec.trials));
    const std::vector<TrialRecord> slice(first, first + spec.trials);
    for (const auto& t : slice) out.failed_trials += t.failed ? 1 : 0;
    auto recs = compute_metrics(points[p].axis, points[p].value, spec.schemes, slice);
    out.records.insert(out.records.end(), recs.begin(), recs.end());
  }
  return out;
}

}  // namespace leoipac
