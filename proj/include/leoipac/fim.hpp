#pragma once

#include <vector>

#include "leoipac/types.hpp"

namespace leoipac {

/// Parameter order inside one link block.
enum FimParam : int { kDoppler = 0, kDelay, kAz, kEl, kReAlpha, kImAlpha, kFimParams };

/// One satellite-to-UT downlink pilot observation set. The noiseless sample
/// at (symbol g, tone k) is
///   l = alpha * amp * exp(-j 2 pi (t_g v - k df tau)) * a(az, el)^H f
/// with t_g = g / df.
struct LinkFimInput {
  double doppler = 0.0;
  double delay = 0.0;
  double az = 0.0;
  double el = 0.0;
  cd alpha{1.0, 0.0};
  double amplitude = 1.0;
  double sample_var = 1.0;  // C, per-sample variance of NLoS + noise
  int mh = 1;
  int mv = 1;
  double spacing = 0.5;
  double subcarrier_spacing = 1.0;
  int num_symbols = 1;      // G
  int num_subcarriers = 1;  // K
  /// Either one precoder shared by every sample, or one per sample in
  /// symbol-major order (g * K + k).
  std::vector<VectorXcd> precoders;
};

/// Steering precoder sqrt(power) a(az, el) / sqrt(M).
VectorXcd steering_precoder(double az, double el, int mh, int mv, double spacing, double power);

/// Noiseless samples for a parameter vector [v, tau, az, el, Re a, Im a].
VectorXcd link_mean(const LinkFimInput& in, const Eigen::Matrix<double, 6, 1>& theta);
Eigen::Matrix<double, 6, 1> link_parameters(const LinkFimInput& in);

/// Analytic Jacobian of link_mean, one column per parameter.
MatrixXcd link_jacobian(const LinkFimInput& in);

/// 2 Re(D^H D) / C for one link (6 x 6).
MatrixXd link_information(const LinkFimInput& in);

struct FimContext {
  MatrixXd full;        // 6S x 6S, ordered [rho (2S), eta (4S)]
  MatrixXd x, y, z;     // partition blocks
  MatrixXd equivalent;  // J(rho), 2S x 2S
};

/// Equivalent FIM after removing the nuisance parameters. With ridge = 0 a
/// numerically singular nuisance block raises SingularNuisanceBlock; a
/// positive ridge adds ridge * diag(Z) before the Schur complement.
FimContext compute_fim(const std::vector<LinkFimInput>& links, double ridge = 0.0);

/// Schur complement X - Y Z^-1 Y^T for an explicitly given full matrix.
MatrixXd equivalent_fim(const MatrixXd& full, Index n_interest, double ridge = 0.0);

}  // namespace leoipac
