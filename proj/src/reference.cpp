#include "crc/reference.hpp"

#include <cmath>

#include "crc/error.hpp"

namespace crc::reference {

namespace {

struct NodeStats {
  Complex sum;
  std::size_t retained = 0;
  double max_inv = 0.0;
};

void add_ratio(NodeStats& s, Complex num, Complex den, double tau_den) {
  const double mod = std::abs(den);
  if (mod > tau_den) {
    s.sum += num / den;
    ++s.retained;
    s.max_inv = std::max(s.max_inv, 1.0 / mod);
  }
}

}  // namespace

FirstStageTarget first_stage_irregular(const DifferencedSample& sample, const IrregularConfig& config,
                                       const FrequencyGrid& grid) {
  config.validate();
  const IrregularSplit s = split_irregular(sample, config.tau_x);
  const std::size_t nm = s.mover_x.size();
  std::vector<double> h(nm, config.bandwidth.h);
  if (config.bandwidth.is_knn()) {
    for (std::size_t i = 0; i < nm; ++i) h[i] = knn_bandwidth(s.mover_x, i, config.bandwidth.k);
  }

  FirstStageTarget t;
  t.grid = grid;
  t.unit_count = nm;
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const double u = grid.nodes[l];
    NodeStats st;
    for (std::size_t i = 0; i < nm; ++i) {
      const Complex den = phi_D_hat(s.stayer_y, s.stayer_x, config.h0, u / s.mover_x[i]);
      const Complex num = numerator_cf(s.mover_ratio, s.mover_x, h[i], s.mover_x[i], u);
      add_ratio(st, num, den, config.tau_den);
    }
    t.values.push_back(st.sum / static_cast<double>(nm));
    t.retained_count.push_back(st.retained);
    t.trim_fraction.push_back(1.0 - static_cast<double>(st.retained) / nm);
    t.max_inverse_denominator.push_back(st.max_inv);
  }
  return t;
}

FirstStageTarget first_stage_regular(const StackedSample& sample, const RegularConfig& config,
                                     const FrequencyGrid& grid) {
  config.validate();
  const RegularPrecompute pre = precompute_regular(sample);
  const std::size_t n = pre.size();

  FirstStageTarget t;
  t.grid = grid;
  t.unit_count = n;
  t.values.assign(grid.size(), {});
  t.retained_count.assign(grid.size(), 0);
  t.trim_fraction.assign(grid.size(), 0.0);
  t.max_inverse_denominator.assign(grid.size(), 0.0);
  const std::size_t z = grid.zero_index();
  for (std::size_t l = z; l < grid.size(); ++l) {
    const double u = grid.nodes[l];
    NodeStats st;
    for (std::size_t i = 0; i < n; ++i) {
      const double xx = pre.x1[i] * pre.x1[i] + pre.x2[i] * pre.x2[i];
      const Complex den = phi_D_hat_directional(pre, config.h_S, u * pre.x1[i] / xx, u * pre.x2[i] / xx);
      std::vector<double> w(n);
      double total = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        w[k] = gaussian_kernel((pre.x1[k] - pre.x1[i]) / config.h_X) *
               gaussian_kernel((pre.x2[k] - pre.x2[i]) / config.h_X);
        total += w[k];
      }
      for (double& x : w) x /= total;
      const Complex num = u == 0.0 ? Complex(1.0, 0.0) : weighted_ecf(pre.transformed, w, u);
      add_ratio(st, num, den, config.tau_den);
    }
    const Complex m = st.sum / static_cast<double>(n);
    const std::size_t mirror = 2 * z - l;
    t.values[l] = m;
    t.values[mirror] = std::conj(m);
    for (std::size_t idx : {l, mirror}) {
      t.retained_count[idx] = st.retained;
      t.trim_fraction[idx] = 1.0 - static_cast<double>(st.retained) / n;
      t.max_inverse_denominator[idx] = st.max_inv;
    }
  }
  return t;
}

}  // namespace crc::reference
