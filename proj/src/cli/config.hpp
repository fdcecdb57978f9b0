#pragma once

// Run configuration: a JSON tree (comments allowed) with defaults for every field.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crc/bootstrap.hpp"
#include "crc/numerics.hpp"
#include "crc/tuning_cv.hpp"

namespace crc::cli {

enum class Design { kIrregular, kRegular };

std::string to_string(Design d);
Design design_from_string(const std::string& s);

struct TuningConfig {
  double c_tau = 4.0;
  double kappa = 1.0 / 3.0;
  double c0 = 1.0;
  std::optional<double> tau_x;
  std::optional<double> h0;
  double tau_den = 1e-4;
  double cutoff = 4.0;
  int nodes = 101;
  WeightKind weight_kind = WeightKind::kStandardNormal;
  std::optional<double> h_x;
  std::optional<int> knn;
  std::optional<double> h_S;
  std::optional<double> h_X;
  int sieve_dimension = 3;
};

struct EvalGridConfig {
  double lo = -3.0;
  double hi = 3.0;
  int points = 401;
};

struct SimulationConfig {
  std::string spec = "a";
  std::size_t n = 2000;
  std::optional<double> delta;
};

struct MonteCarloSettings {
  int reps = 20;
  /// Overrides the specification preset when set.
  std::optional<int> cv_repetitions;
  std::optional<double> gamma_max;
  std::optional<double> c_tau;
  bool use_cv = true;
};

struct RunConfig {
  Design design = Design::kIrregular;
  std::string input;
  /// Period pair used for first differences of a long panel (irregular design).
  std::optional<int> period_from;
  std::optional<int> period_to;
  /// First of the three periods stacked for the regular design.
  std::optional<int> start_period;
  SimulationConfig simulation;
  TuningConfig tuning;
  EvalGridConfig eval_grid;
  CvConfig cv;
  BootstrapConfig bootstrap;
  MonteCarloSettings montecarlo;
  std::uint64_t seed = 1;
  std::string out = "out";

  void validate() const;
  FrequencyGrid frequency_grid() const;
  std::vector<double> evaluation_grid() const;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

/// Parses a config file; `//` and `/* */` comments are accepted.
RunConfig load_config(const std::string& path);

/// Annotated template with every default.
std::string config_template();

}  // namespace crc::cli
