#include "crc/bootstrap.hpp"

#include <cmath>
#include <sstream>
#include <tuple>

#include "crc/error.hpp"
#include "crc/stats.hpp"

namespace crc {

namespace {

template <typename Sample, typename Tuning, typename Estimate>
BootstrapRun run_bootstrap(const Sample& sample, const Tuning& tuning, const std::vector<double>& eval_grid,
                           const BootstrapConfig& config, const Resampler& resampler, Estimate&& estimate) {
  config.validate();
  BootstrapRun run;
  run.config = config;
  run.eval_grid = eval_grid;
  run.tuning = describe(tuning);
  run.point = estimate(sample).density;

  const std::size_t n = sample.size();
  const std::size_t budget = static_cast<std::size_t>(config.budget_factor) * config.draws;
  run.draws.reserve(config.draws);
  for (int b = 0; b < config.draws; ++b) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (run.attempts >= budget) {
        throw NumericalError("bootstrap retry budget exhausted after " + std::to_string(run.attempts) +
                             " attempts with " + std::to_string(run.failures) + " failed replications");
      }
      ++run.attempts;
      Engine rng = make_engine(config.seed, {std::uint64_t(b), attempt});
      const std::vector<std::size_t> idx = resampler(n, rng);
      try {
        const DensityEstimate d = estimate(sample.subset(idx)).density;
        run.draws.push_back(d.processed_values);
        run.draw_moments.push_back({d.mean, d.variance, d.sd});
        run.draw_tuning.push_back(describe(tuning));
        break;
      } catch (const std::exception& e) {
        ++run.failures;
        run.failure_reasons.push_back("draw " + std::to_string(b) + ": " + e.what());
      }
    }
  }
  return run;
}

std::vector<double> column(const BootstrapRun& run, std::size_t g) {
  std::vector<double> out(run.draws.size());
  for (std::size_t b = 0; b < run.draws.size(); ++b) out[b] = run.draws[b][g];
  return out;
}

MomentInference infer(double point, const std::vector<double>& draws, double alpha, bool nonnegative) {
  MomentInference m;
  m.estimate = point;
  m.se = draws.size() >= 2 ? bootstrap_se(draws) : 0.0;
  std::tie(m.lo, m.hi) = basic_ci(point, draws, alpha, nonnegative);
  return m;
}

}  // namespace

void BootstrapConfig::validate() const {
  if (draws < 1) throw InputError("bootstrap draws must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (budget_factor < 1) throw InputError("bootstrap budget factor must be at least 1");
}

bool BootstrapRun::tuning_frozen() const {
  for (const auto& t : draw_tuning) {
    if (t != tuning) return false;
  }
  return true;
}

std::string describe(const IrregularTuning& t) {
  std::ostringstream os;
  os.precision(17);
  os << "irregular tau_x=" << t.first_stage.tau_x << " h0=" << t.first_stage.h0
     << " tau_den=" << t.first_stage.tau_den << " numerator=" << t.first_stage.bandwidth.describe()
     << " S=" << t.sieve_dimension;
  return os.str();
}

std::string describe(const RegularTuning& t) {
  std::ostringstream os;
  os.precision(17);
  os << "regular h_S=" << t.first_stage.h_S << " h_X=" << t.first_stage.h_X << " tau_den=" << t.first_stage.tau_den
     << " S=" << t.sieve_dimension;
  return os.str();
}

BootstrapRun pairs_bootstrap(const DifferencedSample& sample, const IrregularTuning& tuning, const FrequencyGrid& grid,
                             const std::vector<double>& eval_grid, const BootstrapConfig& config,
                             const Resampler& resampler) {
  return run_bootstrap(sample, tuning, eval_grid, config, resampler, [&](const DifferencedSample& s) {
    return estimate_irregular(s, tuning, grid, eval_grid);
  });
}

BootstrapRun pairs_bootstrap(const StackedSample& sample, const RegularTuning& tuning, const FrequencyGrid& grid,
                             const std::vector<double>& eval_grid, const BootstrapConfig& config,
                             const Resampler& resampler) {
  return run_bootstrap(sample, tuning, eval_grid, config, resampler,
                       [&](const StackedSample& s) { return estimate_regular(s, tuning, grid, eval_grid); });
}

std::pair<double, double> basic_ci(double point, std::span<const double> draws, double alpha, bool truncate_at_zero) {
  if (draws.empty()) throw InputError("basic_ci: no draws");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  double lo = 2.0 * point - stats::quantile(draws, 1.0 - alpha / 2.0);
  double hi = 2.0 * point - stats::quantile(draws, alpha / 2.0);
  if (truncate_at_zero) {
    lo = std::max(lo, 0.0);
    hi = std::max(hi, 0.0);
  }
  return {lo, hi};
}

double bootstrap_se(std::span<const double> draws) {
  if (draws.size() < 2) throw InputError("bootstrap_se needs at least two draws");
  return stats::sample_sd(draws);
}

PointwiseBands pointwise_bands(const BootstrapRun& run, double alpha) {
  if (run.draws.empty()) throw InputError("bootstrap run has no draws");
  PointwiseBands bands;
  const std::size_t g = run.eval_grid.size();
  bands.se.resize(g);
  bands.lo.resize(g);
  bands.hi.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    const std::vector<double> col = column(run, i);
    bands.se[i] = col.size() >= 2 ? bootstrap_se(col) : 0.0;
    std::tie(bands.lo[i], bands.hi[i]) = basic_ci(run.point.processed_values[i], col, alpha, true);
  }
  return bands;
}

MomentTable moment_inference(const BootstrapRun& run, double alpha) {
  if (run.draw_moments.empty()) throw InputError("bootstrap run has no draws");
  std::vector<double> means, variances, sds;
  for (const auto& m : run.draw_moments) {
    means.push_back(m.mean);
    variances.push_back(m.variance);
    sds.push_back(m.sd);
  }
  MomentTable t;
  t.mean = infer(run.point.mean, means, alpha, false);
  t.variance = infer(run.point.variance, variances, alpha, true);
  t.sd = infer(run.point.sd, sds, alpha, true);
  if (run.point.sd > 0.0) {
    t.sd.se = t.variance.se / (2.0 * run.point.sd);
    t.sd.note = "delta method";
  } else {
    t.sd.available = false;
    t.sd.note = "zero variance estimate: delta method skipped";
  }
  return t;
}

}  // namespace crc
