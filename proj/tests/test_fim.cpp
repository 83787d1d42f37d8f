#include <gtest/gtest.h>

#include "leoipac/channel.hpp"
#include "leoipac/errors.hpp"
#include "leoipac/fim.hpp"
#include "leoipac/linalg.hpp"
#include "leoipac/rng.hpp"

using namespace leoipac;
using Vec6 = Eigen::Matrix<double, 6, 1>;

namespace {

LinkFimInput toy_link(RngStream& rng, int G = 2, int K = 4) {
  LinkFimInput in;
  in.doppler = 0.3 * rng.normal();
  in.delay = 0.05 * rng.uniform();
  in.az = kTwoPi * rng.uniform();
  in.el = 0.3 + 1.0 * rng.uniform();
  in.alpha = rng.complex_normal();
  in.amplitude = 1.5;
  in.sample_var = 0.2;
  in.mh = 2;
  in.mv = 2;
  in.num_symbols = G;
  in.num_subcarriers = K;
  // A precoder per sample keeps the angle nuisances identifiable.
  for (int i = 0; i < G * K; ++i) {
    in.precoders.push_back(steering_precoder(kTwoPi * rng.uniform(), 0.2 + rng.uniform(), 2, 2, 0.5, 1.0));
  }
  return in;
}

MatrixXd finite_difference_fim(const LinkFimInput& in) {
  const Vec6 theta = link_parameters(in);
  const double h = 1e-6;
  MatrixXcd d(in.num_symbols * in.num_subcarriers, 6);
  for (int i = 0; i < 6; ++i) {
    Vec6 tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    d.col(i) = (link_mean(in, tp) - link_mean(in, tm)) / (2 * h);
  }
  return 2.0 * (d.adjoint() * d).real() / in.sample_var;
}

}  // namespace

TEST(Fim, JacobianMatchesFiniteDifference) {
  RngStream rng(1);
  const auto in = toy_link(rng);
  const Vec6 theta = link_parameters(in);
  const MatrixXcd d = link_jacobian(in);
  for (int i = 0; i < 6; ++i) {
    Vec6 tp = theta, tm = theta;
    tp(i) += 1e-6;
    tm(i) -= 1e-6;
    const VectorXcd fd = (link_mean(in, tp) - link_mean(in, tm)) / 2e-6;
    EXPECT_LT((d.col(i) - fd).norm(), 1e-6 * std::max(1.0, fd.norm())) << "param " << i;
  }
}

TEST(Fim, EquivalentMatchesFiniteDifference) {
  RngStream rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const auto in = toy_link(rng);
    const MatrixXd analytic = compute_fim({in}).equivalent;
    const MatrixXd numeric = equivalent_fim(finite_difference_fim(in), 2);
    EXPECT_LT((analytic - numeric).norm(), 1e-4 * analytic.norm());
  }
}

TEST(Fim, ScalesInverselyWithVariance) {
  RngStream rng(3);
  auto in = toy_link(rng);
  const MatrixXd j1 = compute_fim({in}).equivalent;
  in.sample_var *= 4.0;
  const MatrixXd j4 = compute_fim({in}).equivalent;
  EXPECT_LT((j1 - 4.0 * j4).norm(), 1e-10 * j1.norm());
}

// Two independent copies of the same samples carry twice the information.
TEST(Fim, DoublingIidSamplesDoubles) {
  RngStream rng(4);
  const auto in = toy_link(rng);
  const MatrixXd full = compute_fim({in}).full;
  const MatrixXd j = equivalent_fim(full, 2);
  const MatrixXd j2 = equivalent_fim(2.0 * full, 2);
  EXPECT_LT((j2 - 2.0 * j).norm(), 1e-10 * j.norm());
}

TEST(Fim, PsdAndLoewnerInPilotCount) {
  RngStream rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    auto base = toy_link(rng, 2, 4);
    auto more = base;
    more.num_symbols = 4;
    more.precoders = {base.precoders[0]};
    base.precoders = {base.precoders[0]};
    const MatrixXd j2 = compute_fim({base}, 1e-9).equivalent;
    const MatrixXd j4 = compute_fim({more}, 1e-9).equivalent;
    EXPECT_TRUE(is_psd(j2));
    const MatrixXd diff = j4 - j2;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(diff);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9 * j4.trace());
  }
}

TEST(Fim, MultiLinkBlockLayout) {
  RngStream rng(6);
  const auto a = toy_link(rng), b = toy_link(rng);
  const auto ctx = compute_fim({a, b});
  EXPECT_EQ(ctx.equivalent.rows(), 4);
  EXPECT_NEAR(ctx.equivalent(0, 2), 0.0, 1e-12 * ctx.equivalent.norm());
  EXPECT_LT((ctx.equivalent.topLeftCorner(2, 2) - compute_fim({a}).equivalent).norm(),
            1e-9 * ctx.equivalent.norm());
}

TEST(Fim, SingularNuisanceDetected) {
  RngStream rng(7);
  auto in = toy_link(rng);
  // One shared precoder and a single element: the angles do not move the mean.
  in.mh = 1;
  in.mv = 1;
  in.precoders = {VectorXcd::Ones(1)};
  EXPECT_THROW(compute_fim({in}), SingularNuisanceBlock);
  EXPECT_NO_THROW(compute_fim({in}, 1e-9));
}

TEST(Fim, BadInputsThrow) {
  RngStream rng(8);
  auto in = toy_link(rng);
  in.precoders.pop_back();
  EXPECT_THROW(link_jacobian(in), DimensionMismatch);
}
