#include "crc/first_stage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crc/error.hpp"

namespace crc {

double FirstStageTarget::overall_trim_fraction() const {
  if (trim_fraction.empty()) return 0.0;
  double acc = 0.0;
  for (double t : trim_fraction) acc += t;
  return acc / trim_fraction.size();
}

std::size_t FirstStageTarget::min_retained() const {
  return retained_count.empty() ? 0 : *std::min_element(retained_count.begin(), retained_count.end());
}

double FirstStageTarget::instability() const {
  return max_inverse_denominator.empty()
             ? 0.0
             : *std::max_element(max_inverse_denominator.begin(), max_inverse_denominator.end());
}

WeightMatrix scalar_kernel_weights(std::span<const double> anchors, std::span<const double> centers,
                                   std::span<const double> bandwidths) {
  if (anchors.empty()) throw InputError("kernel weights: no anchors");
  if (bandwidths.size() != centers.size() && bandwidths.size() != 1) {
    throw InputError("kernel weights: bandwidth count must be 1 or match centers");
  }
  for (double h : bandwidths) {
    if (!(h > 0.0) || !std::isfinite(h)) throw InputError("kernel weights: bandwidth must be positive");
  }
  WeightMatrix w{centers.size(), anchors.size(), std::vector<double>(centers.size() * anchors.size())};
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(centers.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const double h = bandwidths.size() == 1 ? bandwidths[0] : bandwidths[i];
    const double c = centers[i];
    double* row = w.data.data() + i * w.cols;
    double zmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      const double z = (anchors[k] - c) / h;
      row[k] = z * z;
      zmin = std::min(zmin, row[k]);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      row[k] = std::exp(-0.5 * (row[k] - zmin));
      total += row[k];
    }
    for (std::size_t k = 0; k < anchors.size(); ++k) row[k] /= total;
  }
  return w;
}

WeightMatrix product_kernel_weights(std::span<const double> a1, std::span<const double> a2,
                                    std::span<const double> c1, std::span<const double> c2, double bandwidth) {
  if (a1.empty() || a1.size() != a2.size() || c1.size() != c2.size()) {
    throw InputError("product kernel weights: inconsistent inputs");
  }
  if (!(bandwidth > 0.0)) throw InputError("product kernel weights: bandwidth must be positive");
  WeightMatrix w{c1.size(), a1.size(), std::vector<double>(c1.size() * a1.size())};
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(c1.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double* row = w.data.data() + i * w.cols;
    double zmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < a1.size(); ++k) {
      const double z1 = (a1[k] - c1[i]) / bandwidth;
      const double z2 = (a2[k] - c2[i]) / bandwidth;
      row[k] = z1 * z1 + z2 * z2;
      zmin = std::min(zmin, row[k]);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < a1.size(); ++k) {
      row[k] = std::exp(-0.5 * (row[k] - zmin));
      total += row[k];
    }
    for (std::size_t k = 0; k < a1.size(); ++k) row[k] /= total;
  }
  return w;
}

namespace {

// acc_l += sum_j w_j exp(i l * theta_j) for l = 1..cols-1, with exp(i l theta)
// built by repeated multiplication. phase_re/phase_im are scratch of size n.
void accumulate_powers(std::span<const double> weights, std::span<const double> theta, std::size_t cols,
                       double* acc_re, double* acc_im, std::vector<double>& step_re, std::vector<double>& step_im,
                       std::vector<double>& phase_re, std::vector<double>& phase_im) {
  const std::size_t n = theta.size();
  for (std::size_t j = 0; j < n; ++j) {
    step_re[j] = std::cos(theta[j]);
    step_im[j] = std::sin(theta[j]);
    phase_re[j] = step_re[j];
    phase_im[j] = step_im[j];
  }
  const double* w = weights.data();
  double* pr = phase_re.data();
  double* pi = phase_im.data();
  const double* sr = step_re.data();
  const double* si = step_im.data();
  for (std::size_t l = 1; l < cols; ++l) {
    double sum_re = 0.0;
    double sum_im = 0.0;
#pragma omp simd reduction(+ : sum_re, sum_im)
    for (std::size_t j = 0; j < n; ++j) {
      sum_re += w[j] * pr[j];
      sum_im += w[j] * pi[j];
    }
    acc_re[l] = sum_re;
    acc_im[l] = sum_im;
    if (l + 1 < cols) {
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) {
        const double r = pr[j] * sr[j] - pi[j] * si[j];
        const double m = pr[j] * si[j] + pi[j] * sr[j];
        pr[j] = r;
        pi[j] = m;
      }
    }
  }
}

void check_half_grid(const FrequencyGrid& grid) {
  if (grid.size() < 3 || grid.size() % 2 == 0) throw InputError("frequency grid must be odd-sized and symmetric");
}

}  // namespace

HalfSpectrum shared_weight_cf(std::span<const double> values, std::span<const double> weights,
                              std::span<const double> scales, const FrequencyGrid& grid) {
  check_half_grid(grid);
  if (values.size() != weights.size()) throw InputError("shared_weight_cf: size mismatch");
  const std::size_t cols = grid.half_size();
  HalfSpectrum out(scales.size(), cols);
  const std::size_t n = values.size();
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(scales.size());
#pragma omp parallel
  {
    std::vector<double> theta(n), sr(n), si(n), pr(n), pi(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
      const double a = grid.step * scales[i];
      for (std::size_t j = 0; j < n; ++j) theta[j] = a * values[j];
      double* re = out.re.data() + i * cols;
      double* im = out.im.data() + i * cols;
      re[0] = 1.0;
      im[0] = 0.0;
      accumulate_powers(weights, theta, cols, re, im, sr, si, pr, pi);
    }
  }
  return out;
}

HalfSpectrum row_weight_cf(std::span<const double> values, const WeightMatrix& weights,
                           std::span<const double> scales, const FrequencyGrid& grid) {
  check_half_grid(grid);
  if (weights.cols != values.size() || weights.rows != scales.size()) {
    throw InputError("row_weight_cf: weight matrix shape mismatch");
  }
  const std::size_t cols = grid.half_size();
  HalfSpectrum out(scales.size(), cols);
  const std::size_t n = values.size();
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(scales.size());
#pragma omp parallel
  {
    std::vector<double> theta(n), sr(n), si(n), pr(n), pi(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
      const double a = grid.step * scales[i];
      for (std::size_t j = 0; j < n; ++j) theta[j] = a * values[j];
      double* re = out.re.data() + i * cols;
      double* im = out.im.data() + i * cols;
      re[0] = 1.0;
      im[0] = 0.0;
      accumulate_powers(weights.row(i), theta, cols, re, im, sr, si, pr, pi);
    }
  }
  return out;
}

HalfSpectrum kernel_regression_cf(std::span<const double> targets, const WeightMatrix& weights,
                                  const FrequencyGrid& grid) {
  check_half_grid(grid);
  if (weights.cols != targets.size()) throw InputError("kernel_regression_cf: weight matrix shape mismatch");
  const std::size_t cols = grid.half_size();
  const std::size_t n = targets.size();

  // Phase table E_kl = exp(i l step t_k), row-major over k.
  std::vector<double> e_re(n * cols), e_im(n * cols);
  const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < nn; ++k) {
    const double c = std::cos(grid.step * targets[k]);
    const double s = std::sin(grid.step * targets[k]);
    double* r = e_re.data() + k * cols;
    double* m = e_im.data() + k * cols;
    r[0] = 1.0;
    m[0] = 0.0;
    for (std::size_t l = 1; l < cols; ++l) {
      r[l] = r[l - 1] * c - m[l - 1] * s;
      m[l] = r[l - 1] * s + m[l - 1] * c;
    }
  }

  HalfSpectrum out(weights.rows, cols);
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(weights.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double* re = out.re.data() + i * cols;
    double* im = out.im.data() + i * cols;
    const double* w = weights.data.data() + i * weights.cols;
    for (std::size_t k = 0; k < n; ++k) {
      const double wk = w[k];
      if (wk == 0.0) continue;
      const double* r = e_re.data() + k * cols;
      const double* m = e_im.data() + k * cols;
#pragma omp simd
      for (std::size_t l = 1; l < cols; ++l) {
        re[l] += wk * r[l];
        im[l] += wk * m[l];
      }
    }
    re[0] = 1.0;
    im[0] = 0.0;
  }
  return out;
}

std::vector<Complex> mirror_half(std::span<const Complex> half, const FrequencyGrid& grid) {
  const std::size_t z = grid.zero_index();
  if (half.size() != grid.half_size()) throw InputError("mirror_half: size mismatch");
  std::vector<Complex> full(grid.size());
  for (std::size_t l = 0; l < half.size(); ++l) {
    full[z + l] = half[l];
    full[z - l] = std::conj(half[l]);
  }
  full[z] = half[0];
  return full;
}

FirstStageTarget combine_ratios(const HalfSpectrum& numerator, const HalfSpectrum& denominator, double tau_den,
                                const FrequencyGrid& grid) {
  if (numerator.rows != denominator.rows || numerator.cols != denominator.cols) {
    throw InputError("combine_ratios: numerator and denominator tables differ in shape");
  }
  if (numerator.cols != grid.half_size()) throw InputError("combine_ratios: table does not match grid");
  if (numerator.rows == 0) throw InputError("combine_ratios: no ratio terms");
  if (!(tau_den > 0.0)) throw InputError("tau_den must be positive");

  const std::size_t rows = numerator.rows;
  const std::size_t cols = numerator.cols;
  std::vector<Complex> half(cols);
  std::vector<std::size_t> kept(cols, rows);
  std::vector<double> worst(cols, 1.0);
  std::vector<std::size_t> bad_unit(cols, 0);  // 1 + offending row, 0 if none
  half[0] = Complex(1.0, 0.0);

  const std::ptrdiff_t ncols = static_cast<std::ptrdiff_t>(cols);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t l = 1; l < ncols; ++l) {
    double sum_re = 0.0;
    double sum_im = 0.0;
    std::size_t retained = 0;
    double max_inv = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      const Complex d = denominator.at(i, l);
      const double mod = std::abs(d);
      if (!std::isfinite(mod)) {
        bad_unit[l] = i + 1;
        break;
      }
      if (mod > tau_den) {
        const Complex r = numerator.at(i, l) / d;
        sum_re += r.real();
        sum_im += r.imag();
        ++retained;
        max_inv = std::max(max_inv, 1.0 / mod);
      }
    }
    half[l] = Complex(sum_re / rows, sum_im / rows);
    kept[l] = retained;
    worst[l] = max_inv;
  }
  for (std::size_t l = 0; l < cols; ++l) {
    if (bad_unit[l] != 0) {
      throw NumericalError("non-finite denominator at node " + std::to_string(l) + ", unit " +
                           std::to_string(bad_unit[l] - 1));
    }
    if (!std::isfinite(half[l].real()) || !std::isfinite(half[l].imag())) {
      throw NumericalError("non-finite first-stage value at node " + std::to_string(l));
    }
  }

  FirstStageTarget t;
  t.grid = grid;
  t.values = mirror_half(half, grid);
  t.unit_count = rows;
  const std::size_t z = grid.zero_index();
  t.trim_fraction.assign(grid.size(), 0.0);
  t.retained_count.assign(grid.size(), rows);
  t.max_inverse_denominator.assign(grid.size(), 1.0);
  for (std::size_t l = 0; l < cols; ++l) {
    const double frac = 1.0 - static_cast<double>(kept[l]) / rows;
    for (std::size_t idx : {z + l, z - l}) {
      t.trim_fraction[idx] = frac;
      t.retained_count[idx] = kept[l];
      t.max_inverse_denominator[idx] = worst[l];
    }
  }
  return t;
}

}  // namespace crc
