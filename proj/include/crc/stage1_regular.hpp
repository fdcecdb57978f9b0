#pragma once

// First-stage estimator for the regular design (T = 2, p = 1): an annihilator
// removes beta for every unit, and phi_D is smoothed over directions on the circle.

#include <vector>

#include "crc/first_stage.hpp"
#include "crc/panel.hpp"

namespace crc {

/// Per-unit quantities derived once from a stacked sample.
struct RegularPrecompute {
  std::vector<double> x1, x2;
  std::vector<double> transformed;  // X'Y / X'X
  std::vector<double> lambda1, lambda2;  // (X_2, -X_1)
  std::vector<double> norm;  // |lambda| = |X|
  std::vector<double> dir1, dir2;  // lambda / |lambda|
  std::vector<double> zstar;  // (X_2 Y_1 - X_1 Y_2) / |lambda|

  std::size_t size() const noexcept { return x1.size(); }
};

RegularPrecompute precompute_regular(const StackedSample& sample);

struct RegularConfig {
  double h_S = 0.0;
  double h_X = 0.0;
  double tau_den = 1e-4;

  void validate() const;
};

/// Directionally smoothed ECF of Z* at xi (chordal-distance Gaussian weights
/// around xi / |xi|). Exactly 1 at xi = 0.
Complex phi_D_hat_directional(const RegularPrecompute& pre, double h_S, double xi1, double xi2);

/// phi_D_hat(u_l X_i / X_i'X_i) for u_l >= 0. `smoother` supplies the directional
/// sample (S_j, Z*_j); `eval` supplies the units whose X_i set the arguments.
HalfSpectrum regular_denominators(const RegularPrecompute& smoother, double h_S, const RegularPrecompute& eval,
                                  const FrequencyGrid& grid);

/// Product-Gaussian kernel regression of exp(i u transformed_k) on X at each X_i.
HalfSpectrum regular_numerators(const RegularPrecompute& pre, double h_X, const FrequencyGrid& grid);

FirstStageTarget first_stage_regular(const StackedSample& sample, const RegularConfig& config,
                                     const FrequencyGrid& grid);

/// Circular Silverman rule: 0.9 min(SD, IQR/1.34) N^{-1/5} on the angles of S_i.
double directional_bandwidth(const RegularPrecompute& pre);

/// Bivariate Silverman reference for the product kernel: mean robust scale of
/// (X_1, X_2) times N^{-1/6}.
double bivariate_reference_bandwidth(const RegularPrecompute& pre);

}  // namespace crc
