#pragma once

// Correlated-random-coefficient data-generating processes, their exact
// oracles, and the Monte Carlo harness.

#include <complex>
#include <functional>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "crc/numerics.hpp"
#include "crc/panel.hpp"
#include "crc/tuning_cv.hpp"

namespace crc {

enum class BetaInnovation { kStandardNormal, kSkewNormal, kGaussianMixture };
enum class ErrorFamily { kGaussian, kLaplace };

std::string to_string(BetaInnovation b);
std::string to_string(ErrorFamily e);

struct DgpSpec {
  std::string name = "a";
  BetaInnovation beta_innovation = BetaInnovation::kStandardNormal;
  ErrorFamily error_family = ErrorFamily::kGaussian;
  double delta = 0.1;
  double theta = 0.7;
  double var_eps1 = 1.0;
  double var_eps2 = 2.0;
  double skew_omega = 2.0;
  double skew_lambda = 4.0;
  /// Mixture components (mean, variance) with equal weights.
  double mix_mean1 = -1.0, mix_var1 = 0.25;
  double mix_mean2 = 1.0, mix_var2 = 0.15;

  /// Laplace scales b_t = sqrt(sigma_t^2 / 2).
  double laplace_b1() const;
  double laplace_b2() const;
  /// Var(D) = var_eps2 + (theta - 1)^2 var_eps1.
  double var_d() const;
};

/// Presets "a" to "d".
DgpSpec dgp_preset(const std::string& name);

struct SimulatedData {
  PanelDataset panel;
  DifferencedSample sample;
  std::vector<double> beta;
  std::vector<double> d;
};

/// Two periods in levels: y_t = alpha + beta x_t + u_t, then first-differenced.
SimulatedData simulate(const DgpSpec& spec, std::size_t n, std::uint64_t seed);

/// Draws of D = eps2 + (theta - 1) eps1 only (for oracle checks).
std::vector<double> simulate_d(const DgpSpec& spec, std::size_t n, std::uint64_t seed);
std::vector<double> simulate_beta_innovation(const DgpSpec& spec, std::size_t n, std::uint64_t seed);

double true_phi_D(const DgpSpec& spec, double v);

/// Density of the innovation eps_beta.
double innovation_density(const DgpSpec& spec, double e);

/// f_beta(b) = int |s|^{-1} f_eps(b/s) f_zeta(s) ds, zeta ~ N(1, 4 delta^2).
std::vector<double> true_f_beta(const DgpSpec& spec, std::span<const double> b_grid);

/// Half-width of the window around s = 0 left out of the mixture integral.
inline constexpr double kScaleWindow = 1e-9;

struct MonteCarloConfig {
  DgpSpec spec;
  std::size_t n = 2000;
  int reps = 100;
  double c_tau = 4.0;
  double kappa = 1.0 / 3.0;
  double c0 = 1.0;
  double tau_den = 1e-4;
  double cutoff = 4.0;
  int nodes = 101;
  WeightKind weight_kind = WeightKind::kStandardNormal;
  bool use_cv = true;
  CvConfig cv;
  /// Used when use_cv is false.
  NumeratorBandwidth bandwidth = NumeratorBandwidth::fixed(0.5);
  int sieve_dimension = 3;
  std::vector<double> eval_grid;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Settings for the four specifications (c_tau, weights, candidate grids, evaluation grid).
MonteCarloConfig monte_carlo_preset(const std::string& spec_name);

struct MonteCarloRep {
  int rep = 0;
  bool ok = false;
  std::string error;
  double stayer_share = 0.0;
  double tau_x = 0.0;
  double ise = 0.0;
  CvCandidate selected;
  std::vector<double> density;
};

struct MonteCarloSummary {
  std::vector<double> eval_grid;
  std::vector<double> truth;
  std::vector<double> average;
  std::vector<double> median;
  std::vector<double> q25;
  std::vector<double> q75;
  std::vector<MonteCarloRep> reps;
  std::size_t failures = 0;
  /// Counts of selected tuning, keyed by candidate description.
  std::map<std::string, int> tuning_histogram;
  std::map<int, int> sieve_histogram;

  std::vector<double> ise() const;
  std::vector<double> stayer_shares() const;
  double median_ise() const;
  double mean_stayer_share() const;
};

/// Integrated squared error by the trapezoid rule.
double integrated_squared_error(std::span<const double> grid, std::span<const double> estimate,
                                std::span<const double> truth);

MonteCarloSummary monte_carlo_run(const MonteCarloConfig& config);

/// Same, with a callback after every replication.
MonteCarloSummary monte_carlo_run(const MonteCarloConfig& config,
                                  const std::function<void(const MonteCarloRep&)>& progress);

std::string describe(const CvCandidate& c);

}  // namespace crc
