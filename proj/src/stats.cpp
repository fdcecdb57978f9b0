#include "crc/stats.hpp"

#include <algorithm>
#include <cmath>

#include "crc/error.hpp"

namespace crc::stats {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = (sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> values, double p) {
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  return quantile_sorted(s, p);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw InputError("mean of empty sample");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / values.size();
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) throw InputError("standard deviation needs at least two values");
  // Shift by the first value so identical inputs give exactly zero.
  const double x0 = values.front();
  double shift = 0.0;
  for (double v : values) shift += v - x0;
  const double m = x0 + shift / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / (values.size() - 1));
}

double iqr(std::span<const double> values) {
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  return quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
}

double robust_scale(std::span<const double> values) {
  const double sd = sample_sd(values);
  const double spread = iqr(values) / 1.34;
  // A sample with a degenerate middle half still has a usable SD.
  if (spread <= 0.0) return sd;
  return std::min(sd, spread);
}

double silverman_bandwidth(std::span<const double> values) {
  return 0.9 * robust_scale(values) * std::pow(static_cast<double>(values.size()), -0.2);
}

double median(std::span<const double> values) { return quantile(values, 0.5); }

}  // namespace crc::stats
