#include "crc/simulation.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "crc/error.hpp"
#include "crc/pipeline.hpp"
#include "crc/rng.hpp"
#include "crc/sieve.hpp"
#include "crc/stats.hpp"

namespace crc {

namespace {

double normal_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double draw_laplace(Engine& rng, double b) {
  const double u = uniform_open(rng) - 0.5;
  return -b * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
}

struct Sampler {
  const DgpSpec& spec;
  std::normal_distribution<double> std_normal{0.0, 1.0};

  double innovation(Engine& rng) {
    switch (spec.beta_innovation) {
      case BetaInnovation::kStandardNormal:
        return std_normal(rng);
      case BetaInnovation::kSkewNormal: {
        const double d = spec.skew_lambda / std::sqrt(1.0 + spec.skew_lambda * spec.skew_lambda);
        const double z0 = std_normal(rng);
        const double z1 = std_normal(rng);
        return spec.skew_omega * (d * std::abs(z0) + std::sqrt(1.0 - d * d) * z1);
      }
      case BetaInnovation::kGaussianMixture: {
        const bool first = uniform_open(rng) < 0.5;
        const double z = std_normal(rng);
        return first ? spec.mix_mean1 + std::sqrt(spec.mix_var1) * z : spec.mix_mean2 + std::sqrt(spec.mix_var2) * z;
      }
    }
    return 0.0;
  }

  double error(Engine& rng, double var) {
    if (spec.error_family == ErrorFamily::kGaussian) return std::sqrt(var) * std_normal(rng);
    return draw_laplace(rng, std::sqrt(var / 2.0));
  }
};

std::string format_id(std::size_t i) { return "u" + std::to_string(i); }

}  // namespace

std::string to_string(BetaInnovation b) {
  switch (b) {
    case BetaInnovation::kStandardNormal:
      return "standard-normal";
    case BetaInnovation::kSkewNormal:
      return "skew-normal";
    case BetaInnovation::kGaussianMixture:
      return "gaussian-mixture";
  }
  return "unknown";
}

std::string to_string(ErrorFamily e) { return e == ErrorFamily::kGaussian ? "gaussian" : "laplace"; }

double DgpSpec::laplace_b1() const { return std::sqrt(var_eps1 / 2.0); }
double DgpSpec::laplace_b2() const { return std::sqrt(var_eps2 / 2.0); }
double DgpSpec::var_d() const { return var_eps2 + (theta - 1.0) * (theta - 1.0) * var_eps1; }

DgpSpec dgp_preset(const std::string& name) {
  DgpSpec s;
  s.name = name;
  if (name == "a") {
    s.beta_innovation = BetaInnovation::kStandardNormal;
  } else if (name == "b") {
    s.beta_innovation = BetaInnovation::kSkewNormal;
  } else if (name == "c") {
    s.beta_innovation = BetaInnovation::kGaussianMixture;
  } else if (name == "d") {
    s.beta_innovation = BetaInnovation::kGaussianMixture;
    s.error_family = ErrorFamily::kLaplace;
  } else {
    throw InputError("unknown specification '" + name + "' (expected a, b, c or d)");
  }
  return s;
}

SimulatedData simulate(const DgpSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InputError("simulate: N must be at least 1");
  Engine rng = make_engine(seed, {0x5151});
  Sampler draw{spec};
  std::normal_distribution<double> std_normal(0.0, 1.0);

  std::vector<PanelRecord> records;
  records.reserve(2 * n);
  SimulatedData out;
  out.beta.resize(n);
  out.d.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = std_normal(rng);
    const double z = 2.0 * std_normal(rng);
    const double x2 = z + x1;
    const double alpha = x1 + x2 + std_normal(rng);
    const double zeta = 1.0 + spec.delta * (x2 - x1);
    const double beta = zeta * draw.innovation(rng);
    const double e1 = draw.error(rng, spec.var_eps1);
    const double e2 = draw.error(rng, spec.var_eps2);
    const double u1 = e1;
    const double u2 = e2 + spec.theta * e1;
    const std::string id = format_id(i);
    records.push_back({id, 1, alpha + beta * x1 + u1, x1});
    records.push_back({id, 2, alpha + beta * x2 + u2, x2});
    out.beta[i] = beta;
    out.d[i] = u2 - u1;
  }
  out.panel = PanelDataset(std::move(records));
  out.sample = first_difference(out.panel, 1, 2).sample;
  return out;
}

std::vector<double> simulate_d(const DgpSpec& spec, std::size_t n, std::uint64_t seed) {
  Engine rng = make_engine(seed, {0xD});
  Sampler draw{spec};
  std::vector<double> d(n);
  for (auto& v : d) {
    const double e1 = draw.error(rng, spec.var_eps1);
    const double e2 = draw.error(rng, spec.var_eps2);
    v = e2 + (spec.theta - 1.0) * e1;
  }
  return d;
}

std::vector<double> simulate_beta_innovation(const DgpSpec& spec, std::size_t n, std::uint64_t seed) {
  Engine rng = make_engine(seed, {0xB});
  Sampler draw{spec};
  std::vector<double> e(n);
  for (auto& v : e) v = draw.innovation(rng);
  return e;
}

double true_phi_D(const DgpSpec& spec, double v) {
  const double c = spec.theta - 1.0;
  if (spec.error_family == ErrorFamily::kGaussian) return std::exp(-0.5 * spec.var_d() * v * v);
  const double b1 = spec.laplace_b1();
  const double b2 = spec.laplace_b2();
  return 1.0 / (1.0 + b2 * b2 * v * v) / (1.0 + b1 * b1 * c * c * v * v);
}

double innovation_density(const DgpSpec& spec, double e) {
  switch (spec.beta_innovation) {
    case BetaInnovation::kStandardNormal:
      return normal_pdf(e, 0.0, 1.0);
    case BetaInnovation::kSkewNormal: {
      const double w = spec.skew_omega;
      return 2.0 / w * normal_pdf(e / w, 0.0, 1.0) * normal_cdf(spec.skew_lambda * e / w);
    }
    case BetaInnovation::kGaussianMixture:
      return 0.5 * normal_pdf(e, spec.mix_mean1, spec.mix_var1) + 0.5 * normal_pdf(e, spec.mix_mean2, spec.mix_var2);
  }
  return 0.0;
}

std::vector<double> true_f_beta(const DgpSpec& spec, std::span<const double> b_grid) {
  using boost::math::quadrature::gauss_kronrod;
  const double sd_zeta = 2.0 * spec.delta;
  std::vector<double> out(b_grid.size());
  if (sd_zeta == 0.0) {
    for (std::size_t i = 0; i < b_grid.size(); ++i) out[i] = innovation_density(spec, b_grid[i]);
    return out;
  }
  const double lo = 1.0 - 8.0 * sd_zeta;
  const double hi = 1.0 + 8.0 * sd_zeta;
  for (std::size_t i = 0; i < b_grid.size(); ++i) {
    const double b = b_grid[i];
    if (!std::isfinite(b)) throw InputError("true_f_beta: non-finite grid point");
    const auto integrand = [&](double s) {
      return innovation_density(spec, b / s) * normal_pdf(s, 1.0, sd_zeta * sd_zeta) / std::abs(s);
    };
    const auto integrate = [&](double a, double c) {
      // Split at the zeta mode so the adaptive rule sees the peak at a panel edge.
      double total = 0.0;
      const double mid = std::clamp(1.0, a, c);
      for (auto [x0, x1] : {std::pair{a, mid}, std::pair{mid, c}}) {
        if (x1 > x0) total += gauss_kronrod<double, 31>::integrate(integrand, x0, x1, 20, 1e-13);
      }
      return total;
    };
    if (lo < 0.0 && hi > 0.0) {
      out[i] = integrate(lo, -kScaleWindow) + integrate(kScaleWindow, hi);
    } else {
      out[i] = integrate(lo, hi);
    }
  }
  return out;
}

void MonteCarloConfig::validate() const {
  if (n < 10) throw InputError("Monte Carlo sample size must be at least 10");
  if (reps < 1) throw InputError("Monte Carlo reps must be at least 1");
  if (!(c_tau > 0.0) || !(kappa > 0.0) || !(c0 > 0.0)) throw InputError("c_tau, kappa and c0 must be positive");
  if (!(tau_den > 0.0)) throw InputError("tau_den must be positive");
  if (eval_grid.size() < 2) throw InputError("Monte Carlo evaluation grid needs at least two points");
  if (use_cv) {
    cv.validate();
  } else if (sieve_dimension < 1) {
    throw InputError("sieve dimension must be positive");
  }
}

MonteCarloConfig monte_carlo_preset(const std::string& spec_name) {
  MonteCarloConfig c;
  c.spec = dgp_preset(spec_name);
  c.cv.gamma_max = 1e4;
  c.cv.rho_max = 0.5;
  c.eval_grid = linspace(-4.0, 4.0, 401);
  if (spec_name == "a" || spec_name == "b") {
    c.c_tau = 4.0;
    c.weight_kind = WeightKind::kStandardNormal;
    c.cv.bandwidth_multipliers = {0.5, 0.75, 1.0, 1.5, 2.0};
    c.cv.sieve_dimensions = spec_name == "a" ? std::vector<int>{3, 5, 7, 9, 11, 13, 15}
                                             : std::vector<int>{3, 5, 7, 9, 11, 13, 15, 17, 19};
    if (spec_name == "b") c.eval_grid = linspace(-3.0, 9.0, 481);
  } else {
    c.c_tau = 5.0;
    c.weight_kind = WeightKind::kStudentT3;
    c.cv.knn = {5, 10, 15, 20, 30};
    c.cv.sieve_dimensions = {7, 9, 11, 13, 15, 17, 19};
  }
  return c;
}

std::string describe(const CvCandidate& c) {
  return c.bandwidth.describe() + ", S=" + std::to_string(c.sieve_dimension);
}

double integrated_squared_error(std::span<const double> grid, std::span<const double> estimate,
                                std::span<const double> truth) {
  if (grid.size() != estimate.size() || grid.size() != truth.size()) throw InputError("ISE: grid size mismatch");
  std::vector<double> sq(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) sq[i] = (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
  return trapezoid(grid, sq);
}

std::vector<double> MonteCarloSummary::ise() const {
  std::vector<double> out;
  for (const auto& r : reps) {
    if (r.ok) out.push_back(r.ise);
  }
  return out;
}

std::vector<double> MonteCarloSummary::stayer_shares() const {
  std::vector<double> out;
  for (const auto& r : reps) {
    if (r.ok) out.push_back(r.stayer_share);
  }
  return out;
}

double MonteCarloSummary::median_ise() const {
  const auto v = ise();
  if (v.empty()) throw NumericalError("no successful Monte Carlo replications");
  return stats::median(v);
}

double MonteCarloSummary::mean_stayer_share() const {
  const auto v = stayer_shares();
  if (v.empty()) throw NumericalError("no successful Monte Carlo replications");
  return stats::mean(v);
}

MonteCarloSummary monte_carlo_run(const MonteCarloConfig& config) { return monte_carlo_run(config, {}); }

MonteCarloSummary monte_carlo_run(const MonteCarloConfig& config,
                                  const std::function<void(const MonteCarloRep&)>& progress) {
  config.validate();
  const FrequencyGrid grid = build_frequency_grid(config.cutoff, config.nodes, config.weight_kind);

  MonteCarloSummary summary;
  summary.eval_grid = config.eval_grid;
  summary.truth = true_f_beta(config.spec, config.eval_grid);

  for (int r = 0; r < config.reps; ++r) {
    MonteCarloRep rep;
    rep.rep = r;
    try {
      const SimulatedData data = simulate(config.spec, config.n, derive_seed(config.seed, {0x51, std::uint64_t(r)}));
      IrregularTuning tuning;
      tuning.first_stage.tau_x = tau_x_rule(data.sample.x, config.c_tau, config.kappa);
      tuning.first_stage.h0 = config.c0 * tuning.first_stage.tau_x;
      tuning.first_stage.tau_den = config.tau_den;
      rep.tau_x = tuning.first_stage.tau_x;
      if (config.use_cv) {
        CvConfig cv = config.cv;
        cv.seed = derive_seed(config.seed, {0xC7, std::uint64_t(r)});
        const IrregularFixed fixed{tuning.first_stage.tau_x, tuning.first_stage.h0, config.tau_den};
        const CvResult result = repeated_cv(data.sample, fixed, cv, grid);
        rep.selected = result.selected;
      } else {
        rep.selected = {config.bandwidth, config.sieve_dimension};
      }
      tuning.first_stage.bandwidth = rep.selected.bandwidth;
      tuning.sieve_dimension = rep.selected.sieve_dimension;
      const EstimationResult est = estimate_irregular(data.sample, tuning, grid, config.eval_grid);
      rep.density = est.density.processed_values;
      rep.stayer_share = est.stayer_share;
      rep.ise = integrated_squared_error(config.eval_grid, rep.density, summary.truth);
      rep.ok = true;
    } catch (const std::exception& e) {
      rep.error = e.what();
      ++summary.failures;
    }
    if (rep.ok) {
      ++summary.tuning_histogram[describe(rep.selected)];
      ++summary.sieve_histogram[rep.selected.sieve_dimension];
    }
    if (progress) progress(rep);
    summary.reps.push_back(std::move(rep));
  }

  const std::size_t g = config.eval_grid.size();
  summary.average.assign(g, 0.0);
  summary.median.assign(g, 0.0);
  summary.q25.assign(g, 0.0);
  summary.q75.assign(g, 0.0);
  std::vector<const MonteCarloRep*> ok;
  for (const auto& r : summary.reps) {
    if (r.ok) ok.push_back(&r);
  }
  if (ok.empty()) return summary;
  std::vector<double> col(ok.size());
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t k = 0; k < ok.size(); ++k) col[k] = ok[k]->density[i];
    summary.average[i] = stats::mean(col);
    std::sort(col.begin(), col.end());
    summary.median[i] = stats::quantile_sorted(col, 0.5);
    summary.q25[i] = stats::quantile_sorted(col, 0.25);
    summary.q75[i] = stats::quantile_sorted(col, 0.75);
  }
  return summary;
}

}  // namespace crc
