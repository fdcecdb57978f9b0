#pragma once

// Panel ingestion, first differencing, stayer/mover partition and the
// rule-of-thumb stayer threshold.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace crc {

struct PanelRecord {
  std::string unit_id;
  int period = 0;
  double outcome = 0.0;
  double regressor = 0.0;
};

/// Long-format panel. Construction validates that (unit_id, period) pairs are
/// unique and that every unit is observed on a contiguous range of periods.
class PanelDataset {
 public:
  PanelDataset() = default;
  explicit PanelDataset(std::vector<PanelRecord> records);

  const std::vector<PanelRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  /// Distinct unit ids in first-appearance order.
  std::vector<std::string> units() const;
  /// Distinct periods, ascending.
  std::vector<int> periods() const;

 private:
  std::vector<PanelRecord> records_;
};

/// Scalar irregular estimation input: Y_i = X_i beta_i + D_i.
struct DifferencedSample {
  std::vector<double> y;
  std::vector<double> x;
  std::vector<std::string> ids;  // optional; empty or same length as y

  std::size_t size() const noexcept { return y.size(); }
  void validate() const;
  DifferencedSample subset(const std::vector<std::size_t>& index) const;
};

/// Regular (T = 2, p = 1) estimation input.
struct StackedSample {
  std::vector<double> y1, y2, x1, x2;
  std::vector<std::string> ids;

  std::size_t size() const noexcept { return y1.size(); }
  void validate() const;
  StackedSample subset(const std::vector<std::size_t>& index) const;
};

struct DifferenceReport {
  DifferencedSample sample;
  std::size_t dropped_units = 0;
};

struct StackReport {
  StackedSample sample;
  std::size_t dropped_missing = 0;   // units without three consecutive periods
  std::size_t dropped_static = 0;    // units with x1 = x2 = 0
};

/// y = outcome_t - outcome_{t-1}, x = regressor_t - regressor_{t-1}.
DifferenceReport first_difference(const PanelDataset& panel, int period_from, int period_to);

/// Stacks the differences (start, start+1) and (start+1, start+2).
/// Uses the earliest period of the panel when start is not given.
StackReport stack_two_periods(const PanelDataset& panel);
StackReport stack_two_periods(const PanelDataset& panel, int start_period);

/// tau_x = c_tau * N^{-kappa} * min(SD(x), IQR(x)/1.34).
double tau_x_rule(const std::vector<double>& x, double c_tau, double kappa = 1.0 / 3.0);

struct Partition {
  std::vector<std::size_t> stayers;
  std::vector<std::size_t> movers;
  double threshold = 0.0;

  double stayer_share() const noexcept {
    const double n = static_cast<double>(stayers.size() + movers.size());
    return n > 0 ? stayers.size() / n : 0.0;
  }
};

/// Stayers |x| < tau_x, movers otherwise. Throws when either side is empty.
Partition partition_stayers(const DifferencedSample& sample, double tau_x);

/// Same split without the non-emptiness check.
Partition split_stayers(const std::vector<double>& x, double tau_x);

struct SupportBounds {
  double lo = 0.0;
  double hi = 0.0;
  double d_lo = 0.0;
  double d_hi = 0.0;
};

/// Indicative support of beta from stayer quantiles of Y and mover bound quantiles.
SupportBounds beta_support_bounds(const DifferencedSample& sample, double tau_x, double alpha = 0.05);

}  // namespace crc
