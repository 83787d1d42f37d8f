#pragma once

#include <vector>

#include "leoipac/jude.hpp"

namespace leoipac {

/// Weighted least squares for the taps of every satellite on the pilot rows
/// of slot t, with the deterministic-flavor noise. Throws
/// UnderdeterminedSystem when there are fewer pilots than taps.
VectorXcd ml_with_position(const JudeProblem& pb, int t);

/// Unstructured estimate for one satellite: per-antenna least squares for P
/// taps on the pilot tones, evaluated on every tone. y_pilot is M x N_p
/// (antenna samples on the pilot tones, in tone order). Returns M x K.
MatrixXcd ml_without_position(const MatrixXcd& y_pilot, const std::vector<Index>& pilot_tones,
                              const VectorXcd& pilot_symbols, int num_subcarriers, int num_paths);

}  // namespace leoipac
