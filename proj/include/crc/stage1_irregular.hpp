#pragma once

// First-stage estimator for the scalar irregular design Y = X beta + D.

#include <span>
#include <string>
#include <vector>

#include "crc/first_stage.hpp"
#include "crc/panel.hpp"

namespace crc {

/// Numerator smoothing: a global bandwidth or a k-nearest-neighbour rule.
struct NumeratorBandwidth {
  enum class Kind { kFixed, kNearestNeighbor };

  Kind kind = Kind::kFixed;
  double h = 0.0;
  int k = 0;

  static NumeratorBandwidth fixed(double h) { return {Kind::kFixed, h, 0}; }
  static NumeratorBandwidth nearest_neighbor(int k) { return {Kind::kNearestNeighbor, 0.0, k}; }

  bool is_knn() const noexcept { return kind == Kind::kNearestNeighbor; }
  /// Larger means smoother; used to order candidates.
  double smoothing() const noexcept { return is_knn() ? static_cast<double>(k) : h; }
  std::string describe() const;

  friend bool operator==(const NumeratorBandwidth&, const NumeratorBandwidth&) = default;
};

struct IrregularConfig {
  double tau_x = 0.0;
  double h0 = 0.0;
  double tau_den = 1e-4;
  NumeratorBandwidth bandwidth;

  void validate() const;
};

/// Kernel-smoothed ECF of stayer outcomes at X = 0. Exactly 1 at v = 0.
Complex phi_D_hat(std::span<const double> stayer_y, std::span<const double> stayer_x, double h0, double v);

/// Kernel regression of exp(i u Y_k / X_k) on X at x_i.
Complex numerator_cf(std::span<const double> mover_ratio, std::span<const double> mover_x, double bandwidth,
                     double x_i, double u);

/// Distance from mover i to its k-th nearest other mover (smallest positive distance if that is 0).
double knn_bandwidth(std::span<const double> mover_x, std::size_t i, int k);
std::vector<double> knn_bandwidths(std::span<const double> mover_x, int k);

/// Stayer/mover columns used by the kernels.
struct IrregularSplit {
  std::vector<double> stayer_y;
  std::vector<double> stayer_x;
  std::vector<double> mover_x;
  std::vector<double> mover_ratio;  // Y_i / X_i
};

IrregularSplit split_irregular(const DifferencedSample& sample, double tau_x);
IrregularSplit split_irregular(const DifferencedSample& sample, const Partition& partition);

/// phi_D_hat(u_l / X_i) for every mover (rows) and u_l >= 0 (columns).
HalfSpectrum irregular_denominators(std::span<const double> stayer_y, std::span<const double> stayer_x, double h0,
                                    std::span<const double> mover_x, const FrequencyGrid& grid);

/// Numerator kernel regressions at every mover's own X_i (leave-self-in).
HalfSpectrum irregular_numerators(std::span<const double> mover_ratio, std::span<const double> mover_x,
                                  const NumeratorBandwidth& bandwidth, const FrequencyGrid& grid);

FirstStageTarget first_stage_irregular(const DifferencedSample& sample, const IrregularConfig& config,
                                       const FrequencyGrid& grid);

}  // namespace crc
