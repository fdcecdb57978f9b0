// crcdecon: density estimation for correlated random coefficients in short panels.

#include <omp.h>

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/io.hpp"
#include "crc/error.hpp"
#include "crc/version.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kInfeasible = 3, kNumerical = 4 };

struct Overrides {
  std::string config;
  std::optional<std::string> design;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::string> input;
  std::optional<std::string> spec;
  std::optional<std::size_t> n;
  std::optional<int> reps;
  std::optional<int> draws;
};

crc::cli::RunConfig resolve(const Overrides& o) {
  crc::cli::RunConfig c = o.config.empty() ? crc::cli::RunConfig{} : crc::cli::load_config(o.config);
  if (o.design) c.design = crc::cli::design_from_string(*o.design);
  if (o.seed) {
    c.seed = *o.seed;
    c.cv.seed = *o.seed;
    c.bootstrap.seed = *o.seed;
  }
  if (o.out) c.out = *o.out;
  if (o.input) c.input = *o.input;
  if (o.spec) c.simulation.spec = *o.spec;
  if (o.n) c.simulation.n = *o.n;
  if (o.reps) c.montecarlo.reps = *o.reps;
  if (o.draws) c.bootstrap.draws = *o.draws;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density estimation for correlated random coefficients in short linear panels"};
  app.set_version_flag("--version", std::string(crc::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config, "JSON run configuration (comments allowed)");
  app.add_option("--design", o.design, "irregular or regular");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--workers", o.workers, "OpenMP worker threads (default: all cores)");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--input", o.input, "Input CSV");
  app.add_option("--spec", o.spec, "Simulation specification a, b, c or d");
  app.add_option("--n", o.n, "Simulation sample size");
  app.add_option("--reps", o.reps, "Monte Carlo replications");
  app.add_option("--draws", o.draws, "Bootstrap replications");

  auto* simulate = app.add_subcommand("simulate", "Simulate a two-period panel from a specification");
  auto* estimate = app.add_subcommand("estimate", "Estimate the coefficient density with fixed tuning");
  auto* cv = app.add_subcommand("cv", "Select (bandwidth, S) by repeated K-fold cross-validation");
  auto* bootstrap = app.add_subcommand("bootstrap", "Pairs bootstrap bands and moment inference");
  auto* montecarlo = app.add_subcommand("montecarlo", "Monte Carlo study for a simulation specification");
  auto* diagnose = app.add_subcommand("diagnose", "Stayer partition and coefficient support bounds");
  auto* init = app.add_subcommand("init-config", "Print an annotated configuration template");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (init->parsed()) {
      std::cout << crc::cli::config_template();
      return kOk;
    }
    const crc::cli::RunConfig config = resolve(o);
    if (o.workers) {
      if (*o.workers < 1) throw crc::InputError("--workers must be at least 1");
      omp_set_num_threads(*o.workers);
    }
    if (simulate->parsed()) crc::cli::cmd_simulate(config);
    if (estimate->parsed()) crc::cli::cmd_estimate(config);
    if (cv->parsed()) crc::cli::cmd_cv(config);
    if (bootstrap->parsed()) crc::cli::cmd_bootstrap(config);
    if (montecarlo->parsed()) crc::cli::cmd_montecarlo(config);
    if (diagnose->parsed()) crc::cli::cmd_diagnose(config);
  } catch (const crc::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kUsage;
  } catch (const crc::InfeasibleError& e) {
    std::cerr << "infeasible (" << crc::to_string(e.condition()) << "): " << e.what() << "\n";
    return kInfeasible;
  } catch (const crc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
