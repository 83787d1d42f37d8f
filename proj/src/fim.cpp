#include "leoipac/fim.hpp"

#include "leoipac/channel.hpp"
#include "leoipac/errors.hpp"
#include "leoipac/kernels/kernels.hpp"
#include "leoipac/linalg.hpp"

namespace leoipac {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;

void check_input(const LinkFimInput& in) {
  const std::size_t n = static_cast<std::size_t>(in.num_symbols) * static_cast<std::size_t>(in.num_subcarriers);
  if (in.num_symbols < 1 || in.num_subcarriers < 1) throw DimensionMismatch("FIM needs G, K >= 1");
  if (in.precoders.size() != 1 && in.precoders.size() != n) {
    throw DimensionMismatch("precoder list must have 1 or G*K entries");
  }
  const Index m = static_cast<Index>(in.mh) * in.mv;
  for (const auto& f : in.precoders) {
    if (f.size() != m) throw DimensionMismatch("precoder length differs from array size");
  }
  if (!(in.sample_var > 0.0)) throw DimensionMismatch("sample variance must be positive");
}

// Per-sample gains a^H f, (da/daz)^H f, (da/del)^H f.
struct BeamGains {
  VectorXcd b, b_az, b_el;
};

BeamGains beam_gains(const LinkFimInput& in, double az, double el) {
  const ArrayDerivatives d = array_response_derivatives(az, el, in.mh, in.mv, in.spacing);
  const Index n = static_cast<Index>(in.precoders.size());
  BeamGains g{VectorXcd(n), VectorXcd(n), VectorXcd(n)};
  for (Index i = 0; i < n; ++i) {
    const VectorXcd& f = in.precoders[static_cast<std::size_t>(i)];
    g.b(i) = d.a.dot(f);
    g.b_az(i) = d.d_az.dot(f);
    g.b_el(i) = d.d_el.dot(f);
  }
  return g;
}

// Separable phase exp(-j 2 pi t_g v) * exp(j 2 pi k df tau).
VectorXcd phases(const LinkFimInput& in, double v, double tau) {
  const int G = in.num_symbols, K = in.num_subcarriers;
  const double T = 1.0 / in.subcarrier_spacing;
  VectorXcd tg(G), tk(K);
  for (int g = 0; g < G; ++g) tg(g) = std::polar(1.0, -kTwoPi * g * T * v);
  for (int k = 0; k < K; ++k) tk(k) = std::polar(1.0, kTwoPi * k * in.subcarrier_spacing * tau);
  VectorXcd out(static_cast<Index>(G) * K);
  for (int g = 0; g < G; ++g) out.segment(static_cast<Index>(g) * K, K) = tg(g) * tk;
  return out;
}

}  // namespace

VectorXcd steering_precoder(double az, double el, int mh, int mv, double spacing, double power) {
  const VectorXcd a = array_response(az, el, mh, mv, spacing);
  return std::sqrt(power / static_cast<double>(a.size())) * a;
}

Vec6 link_parameters(const LinkFimInput& in) {
  Vec6 t;
  t << in.doppler, in.delay, in.az, in.el, in.alpha.real(), in.alpha.imag();
  return t;
}

VectorXcd link_mean(const LinkFimInput& in, const Vec6& theta) {
  check_input(in);
  const BeamGains bg = beam_gains(in, theta(kAz), theta(kEl));
  const VectorXcd ph = phases(in, theta(kDoppler), theta(kDelay));
  const cd alpha(theta(kReAlpha), theta(kImAlpha));
  const Index n = ph.size();
  VectorXcd out(n);
  for (Index i = 0; i < n; ++i) {
    const cd b = bg.b.size() == 1 ? bg.b(0) : bg.b(i);
    out(i) = alpha * in.amplitude * ph(i) * b;
  }
  return out;
}

MatrixXcd link_jacobian(const LinkFimInput& in) {
  check_input(in);
  const BeamGains bg = beam_gains(in, in.az, in.el);
  const VectorXcd ph = phases(in, in.doppler, in.delay);
  const int K = in.num_subcarriers;
  const double T = 1.0 / in.subcarrier_spacing;
  const Index n = ph.size();
  const bool shared = bg.b.size() == 1;
  MatrixXcd d(n, kFimParams);
  for (Index i = 0; i < n; ++i) {
    const Index j = shared ? 0 : i;
    const cd base = in.amplitude * ph(i);
    const cd l = in.alpha * base * bg.b(j);
    const double t = static_cast<double>(i / K) * T;
    const double f = static_cast<double>(i % K) * in.subcarrier_spacing;
    d(i, kDoppler) = -kTwoPi * kJ * t * l;
    d(i, kDelay) = kTwoPi * kJ * f * l;
    d(i, kAz) = in.alpha * base * bg.b_az(j);
    d(i, kEl) = in.alpha * base * bg.b_el(j);
    d(i, kReAlpha) = base * bg.b(j);
    d(i, kImAlpha) = kJ * base * bg.b(j);
  }
  return d;
}

MatrixXd link_information(const LinkFimInput& in) {
  const MatrixXcd d = link_jacobian(in);
  const std::vector<double> w(static_cast<std::size_t>(d.rows()), 2.0 / in.sample_var);
  MatrixXd j(kFimParams, kFimParams);
  kernels::real_gram(d.data(), static_cast<std::size_t>(d.rows()), kFimParams, w.data(), j.data());
  return j;
}

MatrixXd equivalent_fim(const MatrixXd& full, Index n_interest, double ridge) {
  const Index n_nuis = full.rows() - n_interest;
  const MatrixXd x = full.topLeftCorner(n_interest, n_interest);
  if (n_nuis == 0) return x;
  const MatrixXd y = full.topRightCorner(n_interest, n_nuis);
  MatrixXd z = full.bottomRightCorner(n_nuis, n_nuis);
  if (ridge <= 0.0) {
    if (scaled_condition(z) > 1e12) {
      throw SingularNuisanceBlock("nuisance information block is numerically singular");
    }
  } else {
    const VectorXd dz = z.diagonal().cwiseAbs();
    const double fallback = dz.maxCoeff() > 0 ? dz.maxCoeff() : 1.0;
    for (Index i = 0; i < n_nuis; ++i) z(i, i) += ridge * (dz(i) > 0 ? dz(i) : fallback);
  }
  VectorXd s(n_nuis);
  for (Index i = 0; i < n_nuis; ++i) s(i) = z(i, i) > 0 ? 1.0 / std::sqrt(z(i, i)) : 1.0;
  const MatrixXd zs = s.asDiagonal() * z * s.asDiagonal();
  Eigen::LDLT<MatrixXd> ldlt(zs);
  if (ldlt.info() != Eigen::Success) throw SingularNuisanceBlock("nuisance block factorization failed");
  const MatrixXd ys = y * s.asDiagonal();
  MatrixXd out = x - ys * ldlt.solve(ys.transpose());
  symmetrize(out);
  return out;
}

FimContext compute_fim(const std::vector<LinkFimInput>& links, double ridge) {
  const Index S = static_cast<Index>(links.size());
  FimContext ctx;
  ctx.full = MatrixXd::Zero(6 * S, 6 * S);
  for (Index s = 0; s < S; ++s) {
    const MatrixXd js = link_information(links[static_cast<std::size_t>(s)]);
    // Map local [v, tau | az, el, re, im] to the global [rho | eta] layout.
    Index idx[6] = {2 * s, 2 * s + 1, 2 * S + 4 * s, 2 * S + 4 * s + 1, 2 * S + 4 * s + 2,
                    2 * S + 4 * s + 3};
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) ctx.full(idx[a], idx[b]) = js(a, b);
    }
  }
  ctx.x = ctx.full.topLeftCorner(2 * S, 2 * S);
  ctx.y = ctx.full.topRightCorner(2 * S, 4 * S);
  ctx.z = ctx.full.bottomRightCorner(4 * S, 4 * S);
  ctx.equivalent = equivalent_fim(ctx.full, 2 * S, ridge);
  return ctx;
}

}  // namespace leoipac
