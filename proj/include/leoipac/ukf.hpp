#pragma once

#include <functional>

#include "leoipac/types.hpp"

namespace leoipac {

/// Unscented transform tuning; unrelated to the Rician factor.
struct UkfParams {
  double alpha = 1e-3;
  double beta = 2.0;
  double kappa = 0.0;
};

struct UkfState {
  VectorXd mean;
  MatrixXd cov;
};

struct SigmaSet {
  MatrixXd points;  // L x (2L + 1), column 0 is the mean
  VectorXd wm;
  VectorXd wc;
  double lambda = 0.0;
};

double ukf_lambda(Index dim, const UkfParams& p);

SigmaSet generate_sigma_points(const VectorXd& mean, const MatrixXd& cov, const UkfParams& p);
/// Explicit spread Lambda; wc[0] gets the extra (1 - alpha^2 + beta).
SigmaSet generate_sigma_points(const VectorXd& mean, const MatrixXd& cov, double lambda,
                               double alpha, double beta);

struct TransformedMoments {
  VectorXd mean;
  MatrixXd cov;    // sum wc (y - mean)(y - mean)^T
  MatrixXd cross;  // sum wc (x - x_mean)(y - mean)^T
};

/// Weighted moments of f(points) in centred form about column 0, which keeps
/// precision when the centre weight is large and negative.
TransformedMoments unscented_moments(const SigmaSet& set, const MatrixXd& transformed);

using VectorMap = std::function<VectorXd(const VectorXd&)>;
using NoiseModel = std::function<MatrixXd(const SigmaSet&)>;

UkfState ukf_predict(const UkfState& state, const VectorMap& f, const MatrixXd& process_noise,
                     const UkfParams& p);

struct UpdateDiagnostics {
  VectorXd predicted_measurement;
  MatrixXd innovation_cov;
  MatrixXd gain;
};

/// Throws SingularInnovation when the scaled condition of the innovation
/// covariance exceeds 1e12.
UkfState ukf_update(const UkfState& predicted, const VectorXd& observation, const VectorMap& h,
                    const NoiseModel& noise, const UkfParams& p,
                    UpdateDiagnostics* diag = nullptr);

}  // namespace leoipac
