#pragma once

// Nonparametric pairs bootstrap with frozen tuning, basic (reverse-percentile)
// intervals, standard errors and moment inference.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crc/pipeline.hpp"
#include "crc/rng.hpp"

namespace crc {

/// Maps (n, engine) to n resampled row indices.
using Resampler = std::function<std::vector<std::size_t>(std::size_t, Engine&)>;

struct BootstrapConfig {
  int draws = 499;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  /// Total attempts allowed are budget_factor * draws.
  int budget_factor = 10;

  void validate() const;
};

struct MomentInference {
  double estimate = 0.0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool available = true;
  std::string note;
};

struct MomentTable {
  MomentInference mean;
  MomentInference variance;
  MomentInference sd;
};

struct BootstrapRun {
  BootstrapConfig config;
  std::vector<double> eval_grid;
  DensityEstimate point;
  /// draws[b] is the post-processed density of replication b on eval_grid.
  std::vector<std::vector<double>> draws;
  std::vector<Moments> draw_moments;
  /// Tuning each replication was run with; identical to the original by construction.
  std::vector<std::string> draw_tuning;
  std::string tuning;
  std::size_t attempts = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_reasons;

  bool tuning_frozen() const;
};

struct PointwiseBands {
  std::vector<double> se;
  std::vector<double> lo;
  std::vector<double> hi;
};

std::string describe(const IrregularTuning& tuning);
std::string describe(const RegularTuning& tuning);

BootstrapRun pairs_bootstrap(const DifferencedSample& sample, const IrregularTuning& tuning, const FrequencyGrid& grid,
                             const std::vector<double>& eval_grid, const BootstrapConfig& config,
                             const Resampler& resampler = resample_indices);

BootstrapRun pairs_bootstrap(const StackedSample& sample, const RegularTuning& tuning, const FrequencyGrid& grid,
                             const std::vector<double>& eval_grid, const BootstrapConfig& config,
                             const Resampler& resampler = resample_indices);

/// [2 f - q_{1-alpha/2}, 2 f - q_{alpha/2}], optionally clipped below at zero.
std::pair<double, double> basic_ci(double point, std::span<const double> draws, double alpha,
                                   bool truncate_at_zero = false);

/// Sample standard deviation of the draws (N - 1 denominator).
double bootstrap_se(std::span<const double> draws);

PointwiseBands pointwise_bands(const BootstrapRun& run, double alpha);

/// Mean and variance by integration of each draw; the SD row uses the delta method.
MomentTable moment_inference(const BootstrapRun& run, double alpha);

}  // namespace crc
