#include "leoipac/baselines.hpp"

#include <Eigen/Cholesky>

#include "leoipac/errors.hpp"

namespace leoipac {

VectorXcd ml_with_position(const JudeProblem& pb, int t) {
  std::vector<Index> tones;
  for (std::size_t k = 0; k < pb.pilot_mask.size(); ++k)
    if (pb.pilot_mask[k]) tones.push_back(static_cast<Index>(k));
  const int P = pb.num_paths;
  if (static_cast<int>(tones.size()) < P)
    throw UnderdeterminedSystem("fewer pilot tones than taps per satellite");
  SoftSymbols own;
  own.mean = VectorXcd::Zero(pb.num_subcarriers);
  own.second = VectorXd::Zero(pb.num_subcarriers);
  for (Index k : tones) {
    own.mean(k) = pb.pilots[static_cast<std::size_t>(t)](k);
    own.second(k) = std::norm(own.mean(k));
  }
  VectorXcd g(pb.num_satellites * P);
  for (int s = 0; s < pb.num_satellites; ++s) {
    const SatelliteSystem sys = build_satellite_system(pb, t, s, tones, own);
    const MatrixXcd r = sys.noise.dense();
    Eigen::LDLT<MatrixXcd> rl(r);
    const MatrixXcd rx = rl.solve(sys.x);
    const MatrixXcd normal = sys.x.adjoint() * rx;
    Eigen::LDLT<MatrixXcd> nl(normal);
    if (nl.info() != Eigen::Success || !(nl.vectorD().real().minCoeff() > 0.0))
      throw UnderdeterminedSystem("pilot normal equations are singular");
    g.segment(static_cast<Index>(s) * P, P) = nl.solve(rx.adjoint() * (sys.y - sys.noise.mean));
  }
  return g;
}

MatrixXcd ml_without_position(const MatrixXcd& y_pilot, const std::vector<Index>& pilot_tones,
                              const VectorXcd& pilot_symbols, int num_subcarriers, int num_paths) {
  const Index np = static_cast<Index>(pilot_tones.size());
  if (np < num_paths) throw UnderdeterminedSystem("fewer pilot tones than taps per antenna");
  if (y_pilot.cols() != np || pilot_symbols.size() != np)
    throw DimensionMismatch("pilot samples and tones disagree");
  const MatrixXcd q = dft_columns(num_subcarriers, num_paths);
  MatrixXcd a(np, num_paths);
  for (Index i = 0; i < np; ++i) a.row(i) = pilot_symbols(i) * q.row(pilot_tones[static_cast<std::size_t>(i)]);
  // Taps for all antennas at once: rows of y_pilot are right-hand sides.
  const MatrixXcd normal = a.adjoint() * a;
  Eigen::LDLT<MatrixXcd> nl(normal);
  if (nl.info() != Eigen::Success || !(nl.vectorD().real().minCoeff() > 0.0))
    throw UnderdeterminedSystem("pilot normal equations are singular");
  const MatrixXcd taps = nl.solve(a.adjoint() * y_pilot.transpose());  // P x M
  return (q * taps).transpose();                                          // M x K
}

}  // namespace leoipac
