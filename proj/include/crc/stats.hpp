#pragma once

#include <span>
#include <vector>

namespace crc::stats {

/// Sample quantile by linear interpolation of order statistics (R type 7).
double quantile(std::span<const double> values, double p);

/// Type-7 quantile of data that is already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double p);

double mean(std::span<const double> values);

/// Sample standard deviation with the n-1 denominator.
double sample_sd(std::span<const double> values);

double iqr(std::span<const double> values);

/// min(SD, IQR / 1.34), the robust spread used by every rule-of-thumb bandwidth here.
double robust_scale(std::span<const double> values);

/// 0.9 * robust_scale * n^{-1/5}.
double silverman_bandwidth(std::span<const double> values);

double median(std::span<const double> values);

}  // namespace crc::stats
