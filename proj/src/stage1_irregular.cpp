#include "crc/stage1_irregular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crc/error.hpp"

namespace crc {

std::string NumeratorBandwidth::describe() const {
  return is_knn() ? "knn(k=" + std::to_string(k) + ")" : "fixed(h=" + std::to_string(h) + ")";
}

void IrregularConfig::validate() const {
  if (!(tau_x > 0.0)) throw InputError("tau_x must be positive");
  if (!(h0 > 0.0)) throw InputError("h0 must be positive");
  if (!(tau_den > 0.0)) throw InputError("tau_den must be positive");
  if (bandwidth.is_knn() ? bandwidth.k < 1 : !(bandwidth.h > 0.0)) {
    throw InputError("numerator bandwidth must be positive");
  }
}

Complex phi_D_hat(std::span<const double> stayer_y, std::span<const double> stayer_x, double h0, double v) {
  if (stayer_y.empty()) throw InputError("empty stayer set");
  if (stayer_y.size() != stayer_x.size()) throw InputError("phi_D_hat: size mismatch");
  if (v == 0.0) return {1.0, 0.0};
  const auto w = gaussian_kernel_weights(stayer_x, 0.0, h0);
  return weighted_ecf(stayer_y, w, v);
}

Complex numerator_cf(std::span<const double> mover_ratio, std::span<const double> mover_x, double bandwidth,
                     double x_i, double u) {
  if (mover_ratio.empty()) throw InputError("empty mover set");
  if (!(bandwidth > 0.0)) throw InputError("numerator bandwidth must be positive");
  if (u == 0.0) return {1.0, 0.0};
  const auto w = gaussian_kernel_weights(mover_x, x_i, bandwidth);
  return weighted_ecf(mover_ratio, w, u);
}

namespace {

double kth_distance(std::span<const double> x, std::size_t i, int k, std::vector<double>& scratch) {
  scratch.clear();
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j != i) scratch.push_back(std::abs(x[j] - x[i]));
  }
  std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
  const double d = scratch[k - 1];
  if (d > 0.0) return d;
  double smallest = std::numeric_limits<double>::infinity();
  for (double s : scratch) {
    if (s > 0.0) smallest = std::min(smallest, s);
  }
  if (!std::isfinite(smallest)) throw InputError("k-NN bandwidth: all movers share the same X");
  return smallest;
}

}  // namespace

double knn_bandwidth(std::span<const double> mover_x, std::size_t i, int k) {
  if (k < 1) throw InputError("k must be at least 1");
  if (static_cast<std::size_t>(k) >= mover_x.size()) throw InputError("k must be smaller than the mover count");
  if (i >= mover_x.size()) throw InputError("k-NN bandwidth: index out of range");
  std::vector<double> scratch;
  return kth_distance(mover_x, i, k, scratch);
}

std::vector<double> knn_bandwidths(std::span<const double> mover_x, int k) {
  if (k < 1) throw InputError("k must be at least 1");
  if (static_cast<std::size_t>(k) >= mover_x.size()) throw InputError("k must be smaller than the mover count");
  std::vector<double> h(mover_x.size());
  std::vector<double> scratch;
  scratch.reserve(mover_x.size());
  for (std::size_t i = 0; i < mover_x.size(); ++i) h[i] = kth_distance(mover_x, i, k, scratch);
  return h;
}

IrregularSplit split_irregular(const DifferencedSample& sample, const Partition& p) {
  IrregularSplit s;
  for (std::size_t i : p.stayers) {
    s.stayer_y.push_back(sample.y[i]);
    s.stayer_x.push_back(sample.x[i]);
  }
  for (std::size_t i : p.movers) {
    s.mover_x.push_back(sample.x[i]);
    s.mover_ratio.push_back(sample.y[i] / sample.x[i]);
  }
  return s;
}

IrregularSplit split_irregular(const DifferencedSample& sample, double tau_x) {
  return split_irregular(sample, partition_stayers(sample, tau_x));
}

HalfSpectrum irregular_denominators(std::span<const double> stayer_y, std::span<const double> stayer_x, double h0,
                                    std::span<const double> mover_x, const FrequencyGrid& grid) {
  if (stayer_y.empty()) throw InputError("empty stayer set");
  const auto w = gaussian_kernel_weights(stayer_x, 0.0, h0);
  std::vector<double> scales(mover_x.size());
  for (std::size_t i = 0; i < mover_x.size(); ++i) scales[i] = 1.0 / mover_x[i];
  return shared_weight_cf(stayer_y, w, scales, grid);
}

HalfSpectrum irregular_numerators(std::span<const double> mover_ratio, std::span<const double> mover_x,
                                  const NumeratorBandwidth& bandwidth, const FrequencyGrid& grid) {
  if (mover_ratio.empty()) throw InputError("empty mover set");
  std::vector<double> h;
  if (bandwidth.is_knn()) {
    h = knn_bandwidths(mover_x, bandwidth.k);
  } else {
    if (!(bandwidth.h > 0.0)) throw InputError("numerator bandwidth must be positive");
    h = {bandwidth.h};
  }
  const WeightMatrix w = scalar_kernel_weights(mover_x, mover_x, h);
  return kernel_regression_cf(mover_ratio, w, grid);
}

FirstStageTarget first_stage_irregular(const DifferencedSample& sample, const IrregularConfig& config,
                                       const FrequencyGrid& grid) {
  sample.validate();
  config.validate();
  const IrregularSplit s = split_irregular(sample, config.tau_x);
  const HalfSpectrum den = irregular_denominators(s.stayer_y, s.stayer_x, config.h0, s.mover_x, grid);
  const HalfSpectrum num = irregular_numerators(s.mover_ratio, s.mover_x, config.bandwidth, grid);
  return combine_ratios(num, den, config.tau_den, grid);
}

}  // namespace crc
