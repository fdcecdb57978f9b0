#pragma once

// Shared first-stage machinery: the target m_N(u) on a frequency grid and the
// OpenMP kernels that both designs are assembled from.
//
// Every kernel evaluates the nonnegative half of a symmetric grid (u_0 = 0,
// u_l = l * step) and parallelizes over rows. Each row is produced by exactly
// one thread with a fixed summation order, so results do not depend on the
// worker count. Straightforward serial versions live in reference.hpp.

#include <cstddef>
#include <span>
#include <vector>

#include "crc/numerics.hpp"

namespace crc {

/// m_N(u_l) on a frequency grid plus per-node trimming diagnostics.
struct FirstStageTarget {
  FrequencyGrid grid;
  std::vector<Complex> values;
  std::vector<double> trim_fraction;
  std::vector<std::size_t> retained_count;
  /// max 1/|denominator| over untrimmed terms at each node (0 if all trimmed).
  std::vector<double> max_inverse_denominator;
  /// Number of ratio terms averaged at each node (movers, or all units).
  std::size_t unit_count = 0;

  /// Fraction of all (node, unit) pairs that were trimmed.
  double overall_trim_fraction() const;
  /// min over nodes of retained_count.
  std::size_t min_retained() const;
  /// max over nodes of max_inverse_denominator.
  double instability() const;
};

/// Row-major complex table over (row, nonnegative node index).
struct HalfSpectrum {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> re;
  std::vector<double> im;

  HalfSpectrum() = default;
  HalfSpectrum(std::size_t r, std::size_t c) : rows(r), cols(c), re(r * c, 0.0), im(r * c, 0.0) {}

  Complex at(std::size_t r, std::size_t c) const { return {re[r * cols + c], im[r * cols + c]}; }
};

/// Dense row-normalized weight matrix, rows x cols.
struct WeightMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

/// W_ik proportional to K((anchor_k - center_i) / bandwidth_i), Gaussian K, rows sum to one.
/// Normalization is done relative to the nearest anchor so that rows never underflow.
WeightMatrix scalar_kernel_weights(std::span<const double> anchors, std::span<const double> centers,
                                   std::span<const double> bandwidths);

/// Product-Gaussian weights on 2-vectors with a common bandwidth.
WeightMatrix product_kernel_weights(std::span<const double> a1, std::span<const double> a2,
                                    std::span<const double> c1, std::span<const double> c2, double bandwidth);

/// T_il = sum_j w_j exp(i * node_l * scale_i * values_j): one weight vector shared by all rows.
HalfSpectrum shared_weight_cf(std::span<const double> values, std::span<const double> weights,
                              std::span<const double> scales, const FrequencyGrid& grid);

/// T_il = sum_j W_ij exp(i * node_l * scale_i * values_j): row-specific weights.
HalfSpectrum row_weight_cf(std::span<const double> values, const WeightMatrix& weights,
                           std::span<const double> scales, const FrequencyGrid& grid);

/// Kernel regression of exp(i u t_k): T_il = sum_k W_ik exp(i node_l t_k).
HalfSpectrum kernel_regression_cf(std::span<const double> targets, const WeightMatrix& weights,
                                  const FrequencyGrid& grid);

/// Trimmed ratio num/den * 1{|den| > tau_den}, averaged over rows, mirrored to
/// negative nodes by conjugation. Node 0 is exactly 1.
FirstStageTarget combine_ratios(const HalfSpectrum& numerator, const HalfSpectrum& denominator,
                                double tau_den, const FrequencyGrid& grid);

/// Mirrors half-grid values (index 0 is u = 0) onto the full symmetric grid.
std::vector<Complex> mirror_half(std::span<const Complex> half, const FrequencyGrid& grid);

}  // namespace crc
