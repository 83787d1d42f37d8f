#pragma once

#include <vector>

#include "leoipac/channel.hpp"
#include "leoipac/types.hpp"

namespace leoipac {

enum class NoiseFlavor { Detection, EstimationDeterministic, EstimationAugmented };

/// Full covariance over an arbitrary subset of rows.
struct DenseNoiseBlock {
  std::vector<Index> rows;
  MatrixXcd cov;
};

/// Effective-noise statistics. Rows listed in a dense block take their
/// covariance from it; every other row is independent with variance diag(i).
struct NoiseStats {
  NoiseFlavor flavor = NoiseFlavor::EstimationDeterministic;
  VectorXcd mean;
  VectorXd diag;
  std::vector<DenseNoiseBlock> blocks;

  Index rows() const { return mean.size(); }
  MatrixXcd dense() const;

  static NoiseStats white(Index n, double var, NoiseFlavor flavor);
};

/// Concatenates row sets; blocks are re-indexed.
NoiseStats stack_noise(const std::vector<NoiseStats>& parts);

struct KfState {
  VectorXcd mean;
  MatrixXcd cov;
};

enum class KfRoute { Auto, Innovation, Information };

struct KfStepResult {
  KfState filtered;   // g_{t|t}, P_{t|t}
  KfState predicted;  // g_{t+1|t}, P_{t+1|t}
  KfRoute route = KfRoute::Innovation;
};

/// One measurement update followed by the time update through F and G.
/// The information route whitens with the block structure of the noise and
/// is used by Auto when rows exceed the state size. Both throw
/// SingularInnovation when the system to invert has condition above 1e12.
KfStepResult kf_step(const KfState& predicted, const MatrixXcd& x, const VectorXcd& y,
                     const NoiseStats& noise, const VectorXd& f, const VectorXd& g,
                     KfRoute route = KfRoute::Auto);
KfStepResult kf_step(const KfState& predicted, const MatrixXcd& x, const VectorXcd& y,
                     const NoiseStats& noise, const ArMatrices& ar,
                     KfRoute route = KfRoute::Auto);

KfState kf_time_update(const KfState& filtered, const VectorXd& f, const VectorXd& g);

}  // namespace leoipac
