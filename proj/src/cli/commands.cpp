#include "cli/commands.hpp"

#include <cmath>
#include <iostream>

#include "cli/io.hpp"
#include "crc/bootstrap.hpp"
#include "crc/error.hpp"
#include "crc/stats.hpp"
#include "crc/tuning_cv.hpp"
#include "crc/version.hpp"

namespace crc::cli {

using nlohmann::json;

namespace {

std::string path(const RunConfig& c, const std::string& name) { return c.out + "/" + name; }

json density_json(const DensityEstimate& d) {
  return {{"grid", d.eval_grid},  {"raw", d.raw_values},           {"processed", d.processed_values},
          {"mean", d.mean},       {"variance", d.variance},         {"sd", d.sd},
          {"tail_mass", d.tail_mass}};
}

json first_stage_json(const FirstStageTarget& t) {
  const Complex m0 = t.values[t.grid.zero_index()];
  return {{"m_hat_at_zero", {m0.real(), m0.imag()}},
          {"units", t.unit_count},
          {"overall_trim_fraction", t.overall_trim_fraction()},
          {"min_retained", t.min_retained()},
          {"max_inverse_denominator", t.instability()}};
}

json tuning_json(const IrregularTuning& t) {
  json j = {{"tau_x", t.first_stage.tau_x},
            {"h0", t.first_stage.h0},
            {"tau_den", t.first_stage.tau_den},
            {"sieve_dimension", t.sieve_dimension}};
  if (t.first_stage.bandwidth.is_knn()) {
    j["knn"] = t.first_stage.bandwidth.k;
  } else {
    j["h_x"] = t.first_stage.bandwidth.h;
  }
  return j;
}

json tuning_json(const RegularTuning& t) {
  return {{"h_S", t.first_stage.h_S},
          {"h_X", t.first_stage.h_X},
          {"tau_den", t.first_stage.tau_den},
          {"sieve_dimension", t.sieve_dimension}};
}

json candidate_json(const CvCandidate& c) {
  json j = {{"sieve_dimension", c.sieve_dimension}};
  if (c.bandwidth.is_knn()) {
    j["knn"] = c.bandwidth.k;
  } else {
    j["bandwidth"] = c.bandwidth.h;
  }
  return j;
}

void write_first_stage_csv(const std::string& file, const FirstStageTarget& t) {
  std::vector<double> re, im, retained;
  for (std::size_t l = 0; l < t.values.size(); ++l) {
    re.push_back(t.values[l].real());
    im.push_back(t.values[l].imag());
    retained.push_back(static_cast<double>(t.retained_count[l]));
  }
  write_columns(file, {"u", "weight", "re", "im", "trim_fraction", "retained"},
                {t.grid.nodes, t.grid.weights, re, im, t.trim_fraction, retained});
}

/// Fixed quantities the CV needs before candidates are scored.
IrregularFixed irregular_fixed(const RunConfig& c, const DifferencedSample& s) {
  IrregularFixed f;
  f.tau_x = c.tuning.tau_x ? *c.tuning.tau_x : tau_x_rule(s.x, c.tuning.c_tau, c.tuning.kappa);
  f.h0 = c.tuning.h0 ? *c.tuning.h0 : c.tuning.c0 * f.tau_x;
  f.tau_den = c.tuning.tau_den;
  return f;
}

RegularFixed regular_fixed(const RunConfig& c, const StackedSample& s) {
  RegularFixed f;
  f.h_S = c.tuning.h_S ? *c.tuning.h_S : directional_bandwidth(precompute_regular(s));
  f.tau_den = c.tuning.tau_den;
  return f;
}

}  // namespace

json provenance(const RunConfig& config) { return {{"version", kVersion}, {"config", to_json(config)}}; }

IrregularTuning resolve_irregular(const RunConfig& c, const DifferencedSample& s) {
  const IrregularFixed f = irregular_fixed(c, s);
  IrregularTuning t;
  t.first_stage.tau_x = f.tau_x;
  t.first_stage.h0 = f.h0;
  t.first_stage.tau_den = f.tau_den;
  if (c.tuning.knn) {
    t.first_stage.bandwidth = NumeratorBandwidth::nearest_neighbor(*c.tuning.knn);
  } else if (c.tuning.h_x) {
    t.first_stage.bandwidth = NumeratorBandwidth::fixed(*c.tuning.h_x);
  } else {
    t.first_stage.bandwidth = NumeratorBandwidth::fixed(stats::silverman_bandwidth(split_irregular(s, f.tau_x).mover_x));
  }
  t.sieve_dimension = c.tuning.sieve_dimension;
  return t;
}

RegularTuning resolve_regular(const RunConfig& c, const StackedSample& s) {
  RegularTuning t;
  t.first_stage.h_S = regular_fixed(c, s).h_S;
  t.first_stage.h_X = c.tuning.h_X ? *c.tuning.h_X : bivariate_reference_bandwidth(precompute_regular(s));
  t.first_stage.tau_den = c.tuning.tau_den;
  t.sieve_dimension = c.tuning.sieve_dimension;
  return t;
}

MonteCarloConfig resolve_montecarlo(const RunConfig& c) {
  MonteCarloConfig mc = monte_carlo_preset(c.simulation.spec);
  if (c.simulation.delta) mc.spec.delta = *c.simulation.delta;
  mc.n = c.simulation.n;
  mc.reps = c.montecarlo.reps;
  mc.seed = c.seed;
  mc.tau_den = c.tuning.tau_den;
  mc.use_cv = c.montecarlo.use_cv;
  if (c.montecarlo.c_tau) mc.c_tau = *c.montecarlo.c_tau;
  if (c.montecarlo.cv_repetitions) mc.cv.repetitions = *c.montecarlo.cv_repetitions;
  if (c.montecarlo.gamma_max) mc.cv.gamma_max = *c.montecarlo.gamma_max;
  if (!mc.use_cv) {
    if (c.tuning.knn) {
      mc.bandwidth = NumeratorBandwidth::nearest_neighbor(*c.tuning.knn);
    } else if (c.tuning.h_x) {
      mc.bandwidth = NumeratorBandwidth::fixed(*c.tuning.h_x);
    } else {
      throw InputError("montecarlo without CV needs tuning.h_x or tuning.knn");
    }
    mc.sieve_dimension = c.tuning.sieve_dimension;
  }
  return mc;
}

void cmd_simulate(const RunConfig& c) {
  DgpSpec spec = dgp_preset(c.simulation.spec);
  if (c.simulation.delta) spec.delta = *c.simulation.delta;
  const SimulatedData data = simulate(spec, c.simulation.n, c.seed);
  ensure_directory(c.out);
  write_panel_csv(path(c, "panel.csv"), data.panel);

  std::string sample = "id,y,x\n";
  std::string latent = "id,beta,d\n";
  for (std::size_t i = 0; i < data.sample.size(); ++i) {
    sample += data.sample.ids[i] + "," + format_double(data.sample.y[i]) + "," + format_double(data.sample.x[i]) + "\n";
    latent += data.sample.ids[i] + "," + format_double(data.beta[i]) + "," + format_double(data.d[i]) + "\n";
  }
  write_text(path(c, "sample.csv"), sample);
  write_text(path(c, "latent.csv"), latent);

  json meta = provenance(c);
  meta["spec"] = {{"name", spec.name},
                  {"beta_innovation", to_string(spec.beta_innovation)},
                  {"error_family", to_string(spec.error_family)},
                  {"delta", spec.delta},
                  {"theta", spec.theta},
                  {"var_eps1", spec.var_eps1},
                  {"var_eps2", spec.var_eps2},
                  {"var_d", spec.var_d()}};
  if (spec.error_family == ErrorFamily::kLaplace) {
    meta["spec"]["laplace_b1"] = spec.laplace_b1();
    meta["spec"]["laplace_b2"] = spec.laplace_b2();
  }
  if (spec.beta_innovation == BetaInnovation::kSkewNormal) {
    meta["spec"]["skew_omega"] = spec.skew_omega;
    meta["spec"]["skew_lambda"] = spec.skew_lambda;
  }
  if (spec.beta_innovation == BetaInnovation::kGaussianMixture) {
    meta["spec"]["mixture"] = {{"means", {spec.mix_mean1, spec.mix_mean2}},
                               {"variances", {spec.mix_var1, spec.mix_var2}},
                               {"note", "second mixture parameters are variances"}};
  }
  meta["n"] = data.sample.size();
  meta["files"] = {"panel.csv", "sample.csv", "latent.csv"};
  write_json(path(c, "simulate.json"), meta);
  std::cout << "simulated " << data.sample.size() << " units (spec " << spec.name << ") into " << c.out << "\n";
}

void cmd_estimate(const RunConfig& c) {
  const LoadedInput in = load_input(c);
  const FrequencyGrid grid = c.frequency_grid();
  const std::vector<double> eval = c.evaluation_grid();
  json out = provenance(c);
  out["design"] = to_string(c.design);
  out["input_format"] = in.format;
  out["dropped_units"] = in.dropped_units;
  EstimationResult r;
  if (c.design == Design::kIrregular) {
    const IrregularTuning t = resolve_irregular(c, in.differenced);
    r = estimate_irregular(in.differenced, t, grid, eval);
    out["tuning"] = tuning_json(t);
    out["stayer_share"] = r.stayer_share;
  } else {
    const RegularTuning t = resolve_regular(c, in.stacked);
    r = estimate_regular(in.stacked, t, grid, eval);
    out["tuning"] = tuning_json(t);
  }
  out["first_stage"] = first_stage_json(r.target);
  out["density"] = density_json(r.density);
  out["coefficients"] = std::vector<double>(r.coefficients.pi.data(), r.coefficients.pi.data() + r.coefficients.pi.size());

  ensure_directory(c.out);
  write_json(path(c, "density.json"), out);
  write_columns(path(c, "density.csv"), {"b", "raw", "processed"},
                {r.density.eval_grid, r.density.raw_values, r.density.processed_values});
  write_first_stage_csv(path(c, "first_stage.csv"), r.target);
  std::cout << "mean " << r.density.mean << "  variance " << r.density.variance << "  sd " << r.density.sd << "\n";
}

void cmd_cv(const RunConfig& c) {
  const LoadedInput in = load_input(c);
  const FrequencyGrid grid = c.frequency_grid();
  json out = provenance(c);
  out["design"] = to_string(c.design);
  CvResult r;
  if (c.design == Design::kIrregular) {
    const IrregularFixed f = irregular_fixed(c, in.differenced);
    out["fixed"] = {{"tau_x", f.tau_x}, {"h0", f.h0}, {"tau_den", f.tau_den}};
    r = repeated_cv(in.differenced, f, c.cv, grid);
  } else {
    const RegularFixed f = regular_fixed(c, in.stacked);
    out["fixed"] = {{"h_S", f.h_S}, {"tau_den", f.tau_den}};
    r = repeated_cv(in.stacked, f, c.cv, grid);
  }
  out["reference_bandwidth"] = r.reference_bandwidth;
  out["pilot_bandwidth"] = r.pilot_bandwidth;
  out["selected"] = candidate_json(r.selected);
  json set = json::array();
  for (const auto& s : r.one_se_set) set.push_back(candidate_json(s));
  out["one_se_set"] = set;
  json scores = json::array();
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    json s = candidate_json(r.candidates[i]);
    s["mean"] = std::isfinite(r.mean_scores[i]) ? json(r.mean_scores[i]) : json(nullptr);
    s["se"] = std::isfinite(r.se_scores[i]) ? json(r.se_scores[i]) : json(nullptr);
    scores.push_back(s);
  }
  out["scores"] = scores;
  out["failed_fits"] = r.failed_fits;
  json diag = json::array();
  for (const auto& d : r.diagnostics) {
    diag.push_back({{"repetition", d.repetition},
                    {"fold", d.fold},
                    {"training_movers", d.training_movers},
                    {"validation_movers", d.validation_movers},
                    {"gamma", d.gamma},
                    {"rho", d.rho},
                    {"min_retained", d.min_retained}});
  }
  out["feasibility"] = {{"pass", true}, {"folds", diag}};

  ensure_directory(c.out);
  write_json(path(c, "cv.json"), out);
  std::vector<double> smooth, dim, mean, se;
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    smooth.push_back(r.candidates[i].bandwidth.smoothing());
    dim.push_back(r.candidates[i].sieve_dimension);
    mean.push_back(r.mean_scores[i]);
    se.push_back(r.se_scores[i]);
  }
  write_columns(path(c, "cv_scores.csv"), {r.candidates[0].bandwidth.is_knn() ? "knn" : "bandwidth", "S", "mean", "se"},
                {smooth, dim, mean, se});
  std::cout << "selected " << describe(r.selected) << "\n";
}

void cmd_bootstrap(const RunConfig& c) {
  const LoadedInput in = load_input(c);
  const FrequencyGrid grid = c.frequency_grid();
  const std::vector<double> eval = c.evaluation_grid();
  json out = provenance(c);
  out["design"] = to_string(c.design);
  BootstrapRun run;
  if (c.design == Design::kIrregular) {
    const IrregularTuning t = resolve_irregular(c, in.differenced);
    out["tuning"] = tuning_json(t);
    run = pairs_bootstrap(in.differenced, t, grid, eval, c.bootstrap);
  } else {
    const RegularTuning t = resolve_regular(c, in.stacked);
    out["tuning"] = tuning_json(t);
    run = pairs_bootstrap(in.stacked, t, grid, eval, c.bootstrap);
  }
  if (!run.tuning_frozen()) throw NumericalError("bootstrap draws did not share the original tuning");
  const PointwiseBands bands = pointwise_bands(run, c.bootstrap.alpha);
  const MomentTable m = moment_inference(run, c.bootstrap.alpha);
  const auto row = [](const MomentInference& x) {
    json j = {{"estimate", x.estimate}, {"se", x.se}, {"ci", {x.lo, x.hi}}, {"available", x.available}};
    if (!x.note.empty()) j["note"] = x.note;
    return j;
  };
  out["frozen_tuning"] = {{"asserted", true}, {"tuning", run.tuning}};
  out["draws"] = run.draws.size();
  out["attempts"] = run.attempts;
  out["failures"] = run.failures;
  out["failure_reasons"] = run.failure_reasons;
  out["alpha"] = c.bootstrap.alpha;
  out["moments"] = {{"mean", row(m.mean)}, {"variance", row(m.variance)}, {"sd", row(m.sd)}};
  out["density"] = density_json(run.point);
  out["bands"] = {{"se", bands.se}, {"lo", bands.lo}, {"hi", bands.hi}};

  ensure_directory(c.out);
  write_json(path(c, "bootstrap.json"), out);
  write_columns(path(c, "bootstrap.csv"), {"b", "estimate", "se", "lo", "hi"},
                {eval, run.point.processed_values, bands.se, bands.lo, bands.hi});
  std::cout << "mean " << m.mean.estimate << " (" << m.mean.se << ")  variance " << m.variance.estimate << " ("
            << m.variance.se << ")  sd " << m.sd.estimate << " (" << m.sd.se << ")\n";
}

void cmd_montecarlo(const RunConfig& c) {
  const MonteCarloConfig mc = resolve_montecarlo(c);
  const MonteCarloSummary s = monte_carlo_run(mc, [](const MonteCarloRep& r) {
    std::cerr << "rep " << r.rep << (r.ok ? "" : " failed: " + r.error);
    if (r.ok) std::cerr << "  ISE " << r.ise << "  stayers " << r.stayer_share << "  " << describe(r.selected);
    std::cerr << "\n";
  });
  json out = provenance(c);
  out["spec"] = mc.spec.name;
  out["settings"] = {{"n", mc.n},
                     {"reps", mc.reps},
                     {"c_tau", mc.c_tau},
                     {"weight_kind", crc::to_string(mc.weight_kind)},
                     {"cv_repetitions", mc.cv.repetitions},
                     {"gamma_max", mc.cv.gamma_max},
                     {"use_cv", mc.use_cv}};
  out["failures"] = s.failures;
  json reps = json::array();
  for (const auto& r : s.reps) {
    json j = {{"rep", r.rep}, {"ok", r.ok}};
    if (r.ok) {
      j["ise"] = r.ise;
      j["stayer_share"] = r.stayer_share;
      j["tau_x"] = r.tau_x;
      j["selected"] = candidate_json(r.selected);
    } else {
      j["error"] = r.error;
    }
    reps.push_back(j);
  }
  out["reps"] = reps;
  out["tuning_histogram"] = s.tuning_histogram;
  json hist = json::object();
  for (const auto& [k, v] : s.sieve_histogram) hist[std::to_string(k)] = v;
  out["sieve_histogram"] = hist;
  if (s.failures < s.reps.size()) {
    out["median_ise"] = s.median_ise();
    out["mean_stayer_share"] = s.mean_stayer_share();
  }

  ensure_directory(c.out);
  write_json(path(c, "montecarlo.json"), out);
  write_columns(path(c, "montecarlo.csv"), {"grid", "truth", "average", "median", "q25", "q75"},
                {s.eval_grid, s.truth, s.average, s.median, s.q25, s.q75});
  std::cout << "replications " << s.reps.size() << "  failures " << s.failures;
  if (s.failures < s.reps.size()) std::cout << "  median ISE " << s.median_ise();
  std::cout << "\n";
}

void cmd_diagnose(const RunConfig& c) {
  const LoadedInput in = load_input(c);
  json out = provenance(c);
  out["design"] = to_string(c.design);
  out["input_format"] = in.format;
  if (c.design == Design::kIrregular) {
    const DifferencedSample& s = in.differenced;
    const IrregularFixed f = irregular_fixed(c, s);
    const Partition p = split_stayers(s.x, f.tau_x);
    out["units"] = s.size();
    out["tau_x"] = f.tau_x;
    out["h0"] = f.h0;
    out["stayers"] = p.stayers.size();
    out["movers"] = p.movers.size();
    out["stayer_share"] = p.stayer_share();
    const SupportBounds b = beta_support_bounds(s, f.tau_x);
    out["beta_support"] = {{"lo", b.lo}, {"hi", b.hi}, {"d_lo", b.d_lo}, {"d_hi", b.d_hi}};
    std::cout << "stayers " << p.stayers.size() << " / " << s.size() << "  beta support [" << b.lo << ", " << b.hi
              << "]\n";
  } else {
    const RegularPrecompute pre = precompute_regular(in.stacked);
    out["units"] = pre.size();
    out["h_S_rule"] = directional_bandwidth(pre);
    out["h_X_reference"] = bivariate_reference_bandwidth(pre);
    std::cout << "units " << pre.size() << "  h_S rule " << directional_bandwidth(pre) << "\n";
  }
  ensure_directory(c.out);
  write_json(path(c, "diagnose.json"), out);
}

}  // namespace crc::cli
