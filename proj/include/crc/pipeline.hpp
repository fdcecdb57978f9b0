#pragma once

// End-to-end estimation with fixed tuning: first stage, sieve fit, post-processing.

#include <vector>

#include "crc/first_stage.hpp"
#include "crc/panel.hpp"
#include "crc/sieve.hpp"
#include "crc/stage1_irregular.hpp"
#include "crc/stage1_regular.hpp"

namespace crc {

/// Everything the irregular estimator needs once tuning is settled.
struct IrregularTuning {
  IrregularConfig first_stage;
  int sieve_dimension = 3;

  friend bool operator==(const IrregularTuning& a, const IrregularTuning& b) {
    return a.first_stage.tau_x == b.first_stage.tau_x && a.first_stage.h0 == b.first_stage.h0 &&
           a.first_stage.tau_den == b.first_stage.tau_den && a.first_stage.bandwidth == b.first_stage.bandwidth &&
           a.sieve_dimension == b.sieve_dimension;
  }
};

struct RegularTuning {
  RegularConfig first_stage;
  int sieve_dimension = 3;

  friend bool operator==(const RegularTuning& a, const RegularTuning& b) {
    return a.first_stage.h_S == b.first_stage.h_S && a.first_stage.h_X == b.first_stage.h_X &&
           a.first_stage.tau_den == b.first_stage.tau_den && a.sieve_dimension == b.sieve_dimension;
  }
};

struct EstimationResult {
  FirstStageTarget target;
  SieveCoefficients coefficients;
  DensityEstimate density;
  /// Stayer share (irregular only; 0 for the regular design).
  double stayer_share = 0.0;
};

EstimationResult estimate_irregular(const DifferencedSample& sample, const IrregularTuning& tuning,
                                    const FrequencyGrid& grid, const std::vector<double>& eval_grid);

EstimationResult estimate_regular(const StackedSample& sample, const RegularTuning& tuning,
                                  const FrequencyGrid& grid, const std::vector<double>& eval_grid);

/// Fits the sieve to a first-stage target and post-processes the density.
EstimationResult finish_estimate(FirstStageTarget target, int sieve_dimension, const std::vector<double>& eval_grid);

}  // namespace crc
