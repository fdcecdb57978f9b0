#pragma once

// Stabilized repeated K-fold cross-validation for (numerator bandwidth, S),
// with pilot-bandwidth validation targets, feasibility gates and the
// one-standard-error rule.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crc/error.hpp"
#include "crc/first_stage.hpp"
#include "crc/panel.hpp"
#include "crc/stage1_irregular.hpp"

namespace crc {

struct CvCandidate {
  NumeratorBandwidth bandwidth;
  int sieve_dimension = 0;

  friend bool operator==(const CvCandidate&, const CvCandidate&) = default;
};

struct CvConfig {
  int folds = 5;
  int repetitions = 20;
  /// Multiples of the reference bandwidth; ignored when `bandwidths` or `knn` is set.
  std::vector<double> bandwidth_multipliers{0.5, 0.75, 1.0, 1.5, 2.0};
  /// Absolute candidate bandwidths.
  std::vector<double> bandwidths;
  /// k-NN candidates (irregular design only); takes precedence over bandwidths.
  std::vector<int> knn;
  std::vector<int> sieve_dimensions{3, 5, 7, 9, 11, 13, 15};
  double c_pilot = 2.0;
  double pilot_rate = 7.0;
  double gamma_max = 100.0;
  double rho_max = 0.5;
  bool one_se = true;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Per (repetition, fold) quantities behind the feasibility gates.
struct FoldDiagnostics {
  int repetition = 0;
  int fold = 0;
  std::size_t training_movers = 0;
  std::size_t validation_movers = 0;
  std::size_t validation_stayers = 0;  // irregular only
  double gamma = 0.0;  // max 1/|phi_D| over untrimmed training and validation pairs
  double rho = 0.0;  // trimmed share of validation (node, mover) pairs
  std::size_t min_retained = 0;  // min_j n_k(u_j)
};

struct FeasibilityVerdict {
  bool pass = true;
  FeasibilityCondition condition = FeasibilityCondition::kEmptyEvaluationSet;
  std::string detail;
};

/// Gates over one repetition's folds: every fold has validation movers, mean rho
/// <= rho_max, max gamma <= gamma_max, and no node where all validation movers are trimmed.
FeasibilityVerdict feasibility_check(std::span<const FoldDiagnostics> folds, double gamma_max, double rho_max);

/// sum_j w_j |validation_j - trained_j|^2.
double cv_fold_loss(std::span<const Complex> validation, std::span<const Complex> trained,
                    std::span<const double> weights);

/// g = c_pilot * 0.9 * min(SD, IQR/1.34) * N_m^{-1/r}.
double pilot_bandwidth(std::span<const double> mover_x, double c_pilot, double rate);

struct OneSeSelection {
  std::size_t best = 0;  // argmin of the mean score
  std::size_t selected = 0;
  std::vector<std::size_t> set;  // ascending candidate indices
};

/// Largest smoothing within one SE of the minimum, then smallest S. With
/// `use_se` false the threshold collapses to the minimum itself.
OneSeSelection one_se_select(std::span<const double> mean_scores, std::span<const double> se_scores,
                             std::span<const CvCandidate> candidates, bool use_se = true);

struct CvResult {
  std::vector<CvCandidate> candidates;
  std::vector<double> mean_scores;
  std::vector<double> se_scores;
  /// repetition_scores[c][r] = mean over folds of the loss of candidate c in repetition r.
  std::vector<std::vector<double>> repetition_scores;
  CvCandidate selected;
  std::vector<CvCandidate> one_se_set;
  std::vector<FoldDiagnostics> diagnostics;
  double reference_bandwidth = 0.0;
  double pilot_bandwidth = 0.0;
  std::size_t failed_fits = 0;
};

/// K folds of {0..n-1}, sizes differing by at most one.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int folds, std::uint64_t seed);

struct IrregularFixed {
  double tau_x = 0.0;
  double h0 = 0.0;
  double tau_den = 1e-4;
};

struct RegularFixed {
  double h_S = 0.0;
  double tau_den = 1e-4;
};

CvResult repeated_cv(const DifferencedSample& sample, const IrregularFixed& fixed, const CvConfig& config,
                     const FrequencyGrid& grid);

CvResult repeated_cv(const StackedSample& sample, const RegularFixed& fixed, const CvConfig& config,
                     const FrequencyGrid& grid);

}  // namespace crc
