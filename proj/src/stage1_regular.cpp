#include "crc/stage1_regular.hpp"

#include <cmath>
#include <limits>

#include "crc/error.hpp"
#include "crc/stats.hpp"

namespace crc {

RegularPrecompute precompute_regular(const StackedSample& sample) {
  sample.validate();
  RegularPrecompute p;
  const std::size_t n = sample.size();
  p.x1 = sample.x1;
  p.x2 = sample.x2;
  p.transformed.resize(n);
  p.lambda1.resize(n);
  p.lambda2.resize(n);
  p.norm.resize(n);
  p.dir1.resize(n);
  p.dir2.resize(n);
  p.zstar.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = sample.x1[i];
    const double b = sample.x2[i];
    const double xx = a * a + b * b;
    p.transformed[i] = (a * sample.y1[i] + b * sample.y2[i]) / xx;
    p.lambda1[i] = b;
    p.lambda2[i] = -a;
    p.norm[i] = std::hypot(a, b);
    p.dir1[i] = p.lambda1[i] / p.norm[i];
    p.dir2[i] = p.lambda2[i] / p.norm[i];
    p.zstar[i] = (b * sample.y1[i] - a * sample.y2[i]) / p.norm[i];
  }
  return p;
}

void RegularConfig::validate() const {
  if (!(h_S > 0.0)) throw InputError("h_S must be positive");
  if (!(h_X > 0.0)) throw InputError("h_X must be positive");
  if (!(tau_den > 0.0)) throw InputError("tau_den must be positive");
}

namespace {

// Chordal Gaussian weights of the smoothing directions around unit vector (s1, s2).
void directional_weights(const RegularPrecompute& smoother, double h_S, double s1, double s2, double* w) {
  const std::size_t n = smoother.size();
  double zmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const double d1 = smoother.dir1[j] - s1;
    const double d2 = smoother.dir2[j] - s2;
    w[j] = (d1 * d1 + d2 * d2) / (h_S * h_S);
    zmin = std::min(zmin, w[j]);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = std::exp(-0.5 * (w[j] - zmin));
    total += w[j];
  }
  for (std::size_t j = 0; j < n; ++j) w[j] /= total;
}

}  // namespace

Complex phi_D_hat_directional(const RegularPrecompute& pre, double h_S, double xi1, double xi2) {
  if (!(h_S > 0.0)) throw InputError("h_S must be positive");
  const double r = std::hypot(xi1, xi2);
  if (r == 0.0) return {1.0, 0.0};
  if (pre.size() == 0) throw InputError("empty directional sample");
  std::vector<double> raw(pre.size());
  double total = 0.0;
  for (std::size_t j = 0; j < pre.size(); ++j) {
    raw[j] = gaussian_kernel(std::hypot(pre.dir1[j] - xi1 / r, pre.dir2[j] - xi2 / r) / h_S);
    total += raw[j];
  }
  if (!(total > 0.0)) throw NumericalError("empty kernel neighborhood");
  for (double& w : raw) w /= total;
  return weighted_ecf(pre.zstar, raw, r);
}

HalfSpectrum regular_denominators(const RegularPrecompute& smoother, double h_S, const RegularPrecompute& eval,
                                  const FrequencyGrid& grid) {
  if (smoother.size() == 0) throw InputError("empty directional sample");
  if (!(h_S > 0.0)) throw InputError("h_S must be positive");
  // For u > 0 the argument xi = u X_i / |X_i|^2 has direction X_i / |X_i| and length u / |X_i|.
  WeightMatrix w{eval.size(), smoother.size(), std::vector<double>(eval.size() * smoother.size())};
  std::vector<double> scales(eval.size());
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(eval.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const double nx = eval.norm[i];
    directional_weights(smoother, h_S, eval.x1[i] / nx, eval.x2[i] / nx, w.data.data() + i * w.cols);
    scales[i] = 1.0 / nx;
  }
  return row_weight_cf(smoother.zstar, w, scales, grid);
}

HalfSpectrum regular_numerators(const RegularPrecompute& pre, double h_X, const FrequencyGrid& grid) {
  const WeightMatrix w = product_kernel_weights(pre.x1, pre.x2, pre.x1, pre.x2, h_X);
  return kernel_regression_cf(pre.transformed, w, grid);
}

FirstStageTarget first_stage_regular(const StackedSample& sample, const RegularConfig& config,
                                     const FrequencyGrid& grid) {
  config.validate();
  if (sample.size() < 2) throw InputError("regular design needs at least two units");
  const RegularPrecompute pre = precompute_regular(sample);
  const HalfSpectrum den = regular_denominators(pre, config.h_S, pre, grid);
  const HalfSpectrum num = regular_numerators(pre, config.h_X, grid);
  return combine_ratios(num, den, config.tau_den, grid);
}

double directional_bandwidth(const RegularPrecompute& pre) {
  if (pre.size() < 2) throw InputError("directional bandwidth needs at least two units");
  std::vector<double> angle(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) angle[i] = std::atan2(pre.dir2[i], pre.dir1[i]);
  const double h = stats::silverman_bandwidth(angle);
  if (!(h > 0.0)) throw InputError("degenerate directions");
  return h;
}

double bivariate_reference_bandwidth(const RegularPrecompute& pre) {
  if (pre.size() < 2) throw InputError("reference bandwidth needs at least two units");
  const double scale = 0.5 * (stats::robust_scale(pre.x1) + stats::robust_scale(pre.x2));
  if (!(scale > 0.0)) throw InputError("degenerate regressor");
  return scale * std::pow(static_cast<double>(pre.size()), -1.0 / 6.0);
}

}  // namespace crc
