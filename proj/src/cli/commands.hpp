#pragma once

// Subcommand implementations. Each writes its outputs under config.out and
// returns normally or throws one of the library error types.

#include <json.hpp>

#include "cli/config.hpp"
#include "crc/pipeline.hpp"
#include "crc/simulation.hpp"

namespace crc::cli {

/// {"version", "config"} block embedded in every output file.
nlohmann::json provenance(const RunConfig& config);

IrregularTuning resolve_irregular(const RunConfig& config, const DifferencedSample& sample);
RegularTuning resolve_regular(const RunConfig& config, const StackedSample& sample);

/// Monte Carlo settings: specification preset plus config overrides.
MonteCarloConfig resolve_montecarlo(const RunConfig& config);

void cmd_simulate(const RunConfig& config);
void cmd_estimate(const RunConfig& config);
void cmd_cv(const RunConfig& config);
void cmd_bootstrap(const RunConfig& config);
void cmd_montecarlo(const RunConfig& config);
void cmd_diagnose(const RunConfig& config);

}  // namespace crc::cli
