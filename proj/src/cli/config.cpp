#include "cli/config.hpp"

#include <fstream>
#include <sstream>

#include "crc/error.hpp"

namespace crc::cli {

using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config field '") + key + "': " + e.what());
  }
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(j, key, v);
  out = v;
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key) || j.at(key).is_null()) return empty;
  if (!j.at(key).is_object()) throw InputError(std::string("config section '") + key + "' must be an object");
  return j.at(key);
}

}  // namespace

std::string to_string(Design d) { return d == Design::kIrregular ? "irregular" : "regular"; }

Design design_from_string(const std::string& s) {
  if (s == "irregular") return Design::kIrregular;
  if (s == "regular") return Design::kRegular;
  throw InputError("unknown design '" + s + "' (expected irregular or regular)");
}

void RunConfig::validate() const {
  if (!(tuning.c_tau > 0.0) || !(tuning.kappa > 0.0) || !(tuning.c0 > 0.0)) {
    throw InputError("c_tau, kappa and c0 must be positive");
  }
  if (tuning.tau_x && !(*tuning.tau_x > 0.0)) throw InputError("tau_x must be positive");
  if (tuning.h0 && !(*tuning.h0 > 0.0)) throw InputError("h0 must be positive");
  if (!(tuning.tau_den > 0.0)) throw InputError("tau_den must be positive");
  if (tuning.h_x && !(*tuning.h_x > 0.0)) throw InputError("h_x must be positive");
  if (tuning.knn && *tuning.knn < 1) throw InputError("knn must be positive");
  if (tuning.h_S && !(*tuning.h_S > 0.0)) throw InputError("h_S must be positive");
  if (tuning.h_X && !(*tuning.h_X > 0.0)) throw InputError("h_X must be positive");
  if (tuning.sieve_dimension < 1) throw InputError("sieve_dimension must be positive");
  if (design == Design::kRegular && tuning.knn) throw InputError("knn applies to the irregular design only");
  if (!(eval_grid.hi > eval_grid.lo) || eval_grid.points < 2) throw InputError("invalid evaluation grid");
  if (simulation.n < 1) throw InputError("simulation n must be positive");
  if (montecarlo.reps < 1) throw InputError("montecarlo reps must be positive");
  frequency_grid();
  cv.validate();
  bootstrap.validate();
}

FrequencyGrid RunConfig::frequency_grid() const {
  return build_frequency_grid(tuning.cutoff, tuning.nodes, tuning.weight_kind);
}

std::vector<double> RunConfig::evaluation_grid() const {
  return linspace(eval_grid.lo, eval_grid.hi, eval_grid.points);
}

json to_json(const RunConfig& c) {
  json j;
  j["design"] = to_string(c.design);
  j["input"] = c.input;
  j["period_from"] = opt(c.period_from);
  j["period_to"] = opt(c.period_to);
  j["start_period"] = opt(c.start_period);
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["simulation"] = {{"spec", c.simulation.spec}, {"n", c.simulation.n}, {"delta", opt(c.simulation.delta)}};
  const TuningConfig& t = c.tuning;
  j["tuning"] = {{"c_tau", t.c_tau},
                 {"kappa", t.kappa},
                 {"c0", t.c0},
                 {"tau_x", opt(t.tau_x)},
                 {"h0", opt(t.h0)},
                 {"tau_den", t.tau_den},
                 {"cutoff", t.cutoff},
                 {"nodes", t.nodes},
                 {"weight_kind", crc::to_string(t.weight_kind)},
                 {"h_x", opt(t.h_x)},
                 {"knn", opt(t.knn)},
                 {"h_S", opt(t.h_S)},
                 {"h_X", opt(t.h_X)},
                 {"sieve_dimension", t.sieve_dimension}};
  j["eval_grid"] = {{"lo", c.eval_grid.lo}, {"hi", c.eval_grid.hi}, {"points", c.eval_grid.points}};
  j["cv"] = {{"folds", c.cv.folds},
             {"repetitions", c.cv.repetitions},
             {"bandwidth_multipliers", c.cv.bandwidth_multipliers},
             {"bandwidths", c.cv.bandwidths},
             {"knn", c.cv.knn},
             {"sieve_dimensions", c.cv.sieve_dimensions},
             {"c_pilot", c.cv.c_pilot},
             {"pilot_rate", c.cv.pilot_rate},
             {"gamma_max", c.cv.gamma_max},
             {"rho_max", c.cv.rho_max},
             {"one_se", c.cv.one_se}};
  j["bootstrap"] = {{"draws", c.bootstrap.draws},
                    {"alpha", c.bootstrap.alpha},
                    {"budget_factor", c.bootstrap.budget_factor}};
  j["montecarlo"] = {{"reps", c.montecarlo.reps},
                     {"cv_repetitions", opt(c.montecarlo.cv_repetitions)},
                     {"gamma_max", opt(c.montecarlo.gamma_max)},
                     {"c_tau", opt(c.montecarlo.c_tau)},
                     {"use_cv", c.montecarlo.use_cv}};
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InputError("config root must be an object");
  RunConfig c;
  std::string design = to_string(c.design);
  read(j, "design", design);
  c.design = design_from_string(design);
  read(j, "input", c.input);
  read(j, "period_from", c.period_from);
  read(j, "period_to", c.period_to);
  read(j, "start_period", c.start_period);
  read(j, "seed", c.seed);
  read(j, "out", c.out);

  const json& sim = section(j, "simulation");
  read(sim, "spec", c.simulation.spec);
  read(sim, "n", c.simulation.n);
  read(sim, "delta", c.simulation.delta);

  const json& t = section(j, "tuning");
  read(t, "c_tau", c.tuning.c_tau);
  read(t, "kappa", c.tuning.kappa);
  read(t, "c0", c.tuning.c0);
  read(t, "tau_x", c.tuning.tau_x);
  read(t, "h0", c.tuning.h0);
  read(t, "tau_den", c.tuning.tau_den);
  read(t, "cutoff", c.tuning.cutoff);
  read(t, "nodes", c.tuning.nodes);
  std::string kind = crc::to_string(c.tuning.weight_kind);
  read(t, "weight_kind", kind);
  c.tuning.weight_kind = weight_kind_from_string(kind);
  read(t, "h_x", c.tuning.h_x);
  read(t, "knn", c.tuning.knn);
  read(t, "h_S", c.tuning.h_S);
  read(t, "h_X", c.tuning.h_X);
  read(t, "sieve_dimension", c.tuning.sieve_dimension);

  const json& g = section(j, "eval_grid");
  read(g, "lo", c.eval_grid.lo);
  read(g, "hi", c.eval_grid.hi);
  read(g, "points", c.eval_grid.points);

  const json& cv = section(j, "cv");
  read(cv, "folds", c.cv.folds);
  read(cv, "repetitions", c.cv.repetitions);
  read(cv, "bandwidth_multipliers", c.cv.bandwidth_multipliers);
  read(cv, "bandwidths", c.cv.bandwidths);
  read(cv, "knn", c.cv.knn);
  read(cv, "sieve_dimensions", c.cv.sieve_dimensions);
  read(cv, "c_pilot", c.cv.c_pilot);
  read(cv, "pilot_rate", c.cv.pilot_rate);
  read(cv, "gamma_max", c.cv.gamma_max);
  read(cv, "rho_max", c.cv.rho_max);
  read(cv, "one_se", c.cv.one_se);

  const json& b = section(j, "bootstrap");
  read(b, "draws", c.bootstrap.draws);
  read(b, "alpha", c.bootstrap.alpha);
  read(b, "budget_factor", c.bootstrap.budget_factor);

  const json& mc = section(j, "montecarlo");
  read(mc, "reps", c.montecarlo.reps);
  read(mc, "cv_repetitions", c.montecarlo.cv_repetitions);
  read(mc, "gamma_max", c.montecarlo.gamma_max);
  read(mc, "c_tau", c.montecarlo.c_tau);
  read(mc, "use_cv", c.montecarlo.use_cv);

  c.cv.seed = c.seed;
  c.bootstrap.seed = c.seed;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InputError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

std::string config_template() {
  return R"(// crcdecon run configuration. Comments are allowed; null means "use the rule".
{
  "design": "irregular",          // irregular (scalar, T = 1 difference) or regular (T = 2)
  "input": "",                    // CSV: unit_id,period,outcome,regressor | id,y,x | id,y1,y2,x1,x2
  "period_from": null,            // irregular long panels: difference period_to - period_from
  "period_to": null,              //   (defaults: the first two periods)
  "start_period": null,           // regular long panels: first of three stacked periods
  "seed": 1,
  "out": "out",

  "simulation": {
    "spec": "a",                  // a | b | c | d
    "n": 2000,
    "delta": null                 // dependence of beta on X (default 0.1)
  },

  "tuning": {
    "c_tau": 4,                   // stayer threshold tau_x = c_tau * N^-kappa * min(SD, IQR/1.34)
    "kappa": 0.3333333333333333,
    "c0": 1,                      // h0 = c0 * tau_x
    "tau_x": null,                // explicit values override the rules above
    "h0": null,
    "tau_den": 1e-4,              // denominator trimming threshold
    "cutoff": 4,                  // frequency grid [-cutoff, cutoff]
    "nodes": 101,                 // odd
    "weight_kind": "standard-normal",   // or student-t-3
    "h_x": null,                  // irregular numerator bandwidth (default: Silverman on movers)
    "knn": null,                  // irregular k-NN numerator bandwidth instead of h_x
    "h_S": null,                  // regular directional bandwidth (default: circular Silverman)
    "h_X": null,                  // regular numerator bandwidth (default: bivariate reference)
    "sieve_dimension": 3
  },

  "eval_grid": { "lo": -3, "hi": 3, "points": 401 },

  "cv": {
    "folds": 5,
    "repetitions": 20,
    "bandwidth_multipliers": [0.5, 0.75, 1, 1.5, 2],   // times the reference bandwidth
    "bandwidths": [],             // absolute candidates (override the multipliers)
    "knn": [],                    // k-NN candidates, e.g. [5, 10, 15, 20, 30]
    "sieve_dimensions": [3, 5, 7, 9, 11, 13, 15],
    "c_pilot": 2,                 // pilot bandwidth for validation targets
    "pilot_rate": 7,
    "gamma_max": 100,             // feasibility: max inverse denominator
    "rho_max": 0.5,               // feasibility: mean validation trim fraction
    "one_se": true
  },

  "bootstrap": { "draws": 499, "alpha": 0.05, "budget_factor": 10 },

  "montecarlo": {
    "reps": 20,
    "cv_repetitions": null,       // overrides cv repetitions of the specification preset
    "gamma_max": null,            // overrides the preset feasibility threshold
    "c_tau": null,                // overrides the preset (4 for a and b, 5 for c and d)
    "use_cv": true
  }
}
)";
}

}  // namespace crc::cli
