#include "crc/tuning_cv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "crc/rng.hpp"
#include "crc/sieve.hpp"
#include "crc/stage1_regular.hpp"
#include "crc/stats.hpp"

namespace crc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// max 1/|den| over entries with |den| > tau_den.
double max_inverse(const HalfSpectrum& den, double tau_den) {
  double worst = 0.0;
  for (std::size_t i = 0; i < den.re.size(); ++i) {
    const double mod = std::hypot(den.re[i], den.im[i]);
    if (mod > tau_den) worst = std::max(worst, 1.0 / mod);
  }
  return worst;
}

std::vector<CvCandidate> build_candidates(const CvConfig& config, double reference, bool allow_knn) {
  std::vector<NumeratorBandwidth> bws;
  if (!config.knn.empty()) {
    if (!allow_knn) throw InputError("k-NN candidates are only available for the irregular design");
    for (int k : config.knn) bws.push_back(NumeratorBandwidth::nearest_neighbor(k));
  } else if (!config.bandwidths.empty()) {
    for (double h : config.bandwidths) bws.push_back(NumeratorBandwidth::fixed(h));
  } else {
    for (double m : config.bandwidth_multipliers) bws.push_back(NumeratorBandwidth::fixed(m * reference));
  }
  std::vector<CvCandidate> out;
  for (const auto& b : bws) {
    for (int s : config.sieve_dimensions) out.push_back({b, s});
  }
  return out;
}

/// Candidates are bandwidth-major, so every |S grid|-th entry starts a new bandwidth.
std::vector<NumeratorBandwidth> candidate_bandwidths(const std::vector<CvCandidate>& candidates,
                                                     const CvConfig& config) {
  std::vector<NumeratorBandwidth> out;
  for (std::size_t c = 0; c < candidates.size(); c += config.sieve_dimensions.size()) {
    out.push_back(candidates[c].bandwidth);
  }
  return out;
}

int max_dimension(const CvConfig& config) {
  return *std::max_element(config.sieve_dimensions.begin(), config.sieve_dimensions.end());
}

/// One fold's fixed pieces: the validation target and what training candidates share.
struct FoldWork {
  std::vector<Complex> validation;
  HalfSpectrum train_den;
  std::vector<double> train_ratio;
  std::vector<double> train_x;
  RegularPrecompute train_pre;  // regular design only
};

/// Adds fold losses for every candidate given training targets per bandwidth.
template <typename TrainTarget>
void score_fold(const FoldWork& work, const std::vector<NumeratorBandwidth>& bandwidths,
                const std::vector<int>& dims, const SieveProblem& sieve, const FrequencyGrid& grid,
                TrainTarget&& train_target, std::vector<double>& fold_loss, std::size_t& failures) {
  std::size_t c = 0;
  for (const auto& bw : bandwidths) {
    std::vector<Complex> trained;
    bool ok = true;
    try {
      trained = train_target(bw);
    } catch (const std::exception&) {
      ok = false;
    }
    Eigen::VectorXd proj;
    if (ok) proj = sieve.projection(trained);
    for (int s : dims) {
      double loss = kInf;
      if (ok) {
        try {
          const SieveCoefficients fit = sieve.fit(proj, s);
          loss = cv_fold_loss(work.validation, sieve.characteristic(fit.pi), grid.weights);
        } catch (const NumericalError&) {
          loss = kInf;
        }
      }
      if (!std::isfinite(loss)) {
        loss = kInf;
        ++failures;
      }
      fold_loss[c++] += loss;
    }
  }
}

void finalize_scores(CvResult& result, const CvConfig& config) {
  const std::size_t nc = result.candidates.size();
  result.mean_scores.assign(nc, kInf);
  result.se_scores.assign(nc, kInf);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& reps = result.repetition_scores[c];
    if (std::any_of(reps.begin(), reps.end(), [](double v) { return !std::isfinite(v); })) continue;
    result.mean_scores[c] = stats::mean(reps);
    result.se_scores[c] = reps.size() >= 2 ? stats::sample_sd(reps) / std::sqrt(static_cast<double>(reps.size())) : 0.0;
  }
  const bool use_se = config.one_se && config.repetitions >= 2;
  const OneSeSelection sel = one_se_select(result.mean_scores, result.se_scores, result.candidates, use_se);
  result.selected = result.candidates[sel.selected];
  for (std::size_t i : sel.set) result.one_se_set.push_back(result.candidates[i]);
}

void check_repetition(const std::vector<FoldDiagnostics>& all, std::size_t from, const CvConfig& config, int rep) {
  const std::span<const FoldDiagnostics> folds(all.data() + from, all.size() - from);
  const FeasibilityVerdict v = feasibility_check(folds, config.gamma_max, config.rho_max);
  if (!v.pass) throw InfeasibleError(v.condition, "repetition " + std::to_string(rep) + ": " + v.detail);
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& fold) {
  std::vector<char> in(n, 0);
  for (std::size_t i : fold) in[i] = 1;
  std::vector<std::size_t> out;
  out.reserve(n - fold.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

void CvConfig::validate() const {
  if (folds < 2) throw InputError("folds must be at least 2");
  if (repetitions < 1) throw InputError("repetitions must be at least 1");
  if (sieve_dimensions.empty()) throw InputError("empty sieve dimension grid");
  for (int s : sieve_dimensions) {
    if (s < 1) throw InputError("sieve dimensions must be positive");
  }
  if (knn.empty() && bandwidths.empty() && bandwidth_multipliers.empty()) {
    throw InputError("empty bandwidth candidate grid");
  }
  for (int k : knn) {
    if (k < 1) throw InputError("k-NN candidates must be positive");
  }
  for (double h : bandwidths) {
    if (!(h > 0.0)) throw InputError("candidate bandwidths must be positive");
  }
  for (double m : bandwidth_multipliers) {
    if (!(m > 0.0)) throw InputError("bandwidth multipliers must be positive");
  }
  if (!(c_pilot > 0.0) || !(pilot_rate > 0.0)) throw InputError("pilot constants must be positive");
  if (!(gamma_max > 0.0)) throw InputError("gamma_max must be positive");
  if (!(rho_max >= 0.0 && rho_max <= 1.0)) throw InputError("rho_max must lie in [0, 1]");
}

FeasibilityVerdict feasibility_check(std::span<const FoldDiagnostics> folds, double gamma_max, double rho_max) {
  FeasibilityVerdict v;
  if (folds.empty()) {
    v.pass = false;
    v.condition = FeasibilityCondition::kEmptyEvaluationSet;
    v.detail = "no folds";
    return v;
  }
  double rho_sum = 0.0;
  double gamma = 0.0;
  for (const auto& f : folds) {
    if (f.validation_movers == 0) {
      v.pass = false;
      v.condition = FeasibilityCondition::kEmptyEvaluationSet;
      v.detail = "fold " + std::to_string(f.fold) + " has no validation movers";
      return v;
    }
    rho_sum += f.rho;
    gamma = std::max(gamma, f.gamma);
  }
  const double rho = rho_sum / static_cast<double>(folds.size());
  std::ostringstream os;
  if (rho > rho_max) {
    os << "mean validation trim fraction " << rho << " exceeds " << rho_max;
    v.pass = false;
    v.condition = FeasibilityCondition::kExcessiveTrimming;
    v.detail = os.str();
    return v;
  }
  if (gamma > gamma_max) {
    os << "max inverse denominator " << gamma << " exceeds " << gamma_max;
    v.pass = false;
    v.condition = FeasibilityCondition::kExplodingInstability;
    v.detail = os.str();
    return v;
  }
  for (const auto& f : folds) {
    if (f.min_retained == 0) {
      v.pass = false;
      v.condition = FeasibilityCondition::kDegenerateFrequency;
      v.detail = "fold " + std::to_string(f.fold) + " trims every validation mover at some node";
      return v;
    }
  }
  return v;
}

double cv_fold_loss(std::span<const Complex> validation, std::span<const Complex> trained,
                    std::span<const double> weights) {
  if (validation.size() != trained.size() || validation.size() != weights.size()) {
    throw InputError("cv_fold_loss: frequency grids differ");
  }
  double loss = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) loss += weights[j] * std::norm(validation[j] - trained[j]);
  return loss;
}

double pilot_bandwidth(std::span<const double> mover_x, double c_pilot, double rate) {
  if (mover_x.size() < 2) throw InputError("pilot bandwidth needs at least two movers");
  const double scale = stats::robust_scale(mover_x);
  if (!(scale > 0.0)) throw InputError("degenerate mover regressor");
  return c_pilot * 0.9 * scale * std::pow(static_cast<double>(mover_x.size()), -1.0 / rate);
}

OneSeSelection one_se_select(std::span<const double> mean_scores, std::span<const double> se_scores,
                             std::span<const CvCandidate> candidates, bool use_se) {
  const std::size_t n = candidates.size();
  if (n == 0 || mean_scores.size() != n || se_scores.size() != n) {
    throw InputError("one_se_select: score and candidate lists differ");
  }
  // Preference among otherwise equal candidates: smoother first, then smaller S.
  const auto preferred = [&](std::size_t a, std::size_t b) {
    const double sa = candidates[a].bandwidth.smoothing();
    const double sb = candidates[b].bandwidth.smoothing();
    if (sa != sb) return sa > sb;
    return candidates[a].sieve_dimension < candidates[b].sieve_dimension;
  };
  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(mean_scores[i])) continue;
    if (best == n || mean_scores[i] < mean_scores[best] ||
        (mean_scores[i] == mean_scores[best] && preferred(i, best))) {
      best = i;
    }
  }
  if (best == n) throw NumericalError("every tuning candidate failed");

  OneSeSelection out;
  out.best = best;
  const double threshold = mean_scores[best] + (use_se ? se_scores[best] : 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(mean_scores[i]) && mean_scores[i] <= threshold) out.set.push_back(i);
  }
  out.selected = out.set.front();
  for (std::size_t i : out.set) {
    if (preferred(i, out.selected)) out.selected = i;
  }
  return out;
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw InputError("folds must be at least 2");
  if (n < static_cast<std::size_t>(folds)) throw InputError("fewer units than folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine rng(seed);
  shuffle(order, rng);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t p = 0; p < n; ++p) out[p % folds].push_back(order[p]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

CvResult repeated_cv(const DifferencedSample& sample, const IrregularFixed& fixed, const CvConfig& config,
                     const FrequencyGrid& grid) {
  sample.validate();
  config.validate();
  if (!(fixed.tau_x > 0.0) || !(fixed.h0 > 0.0) || !(fixed.tau_den > 0.0)) {
    throw InputError("tau_x, h0 and tau_den must be positive");
  }
  const IrregularSplit full = split_irregular(sample, fixed.tau_x);

  CvResult result;
  result.reference_bandwidth = stats::silverman_bandwidth(full.mover_x);
  result.pilot_bandwidth = pilot_bandwidth(full.mover_x, config.c_pilot, config.pilot_rate);
  result.candidates = build_candidates(config, result.reference_bandwidth, true);
  result.repetition_scores.assign(result.candidates.size(), {});

  const std::vector<NumeratorBandwidth> bandwidths = candidate_bandwidths(result.candidates, config);
  const SieveProblem sieve(grid, max_dimension(config));
  const NumeratorBandwidth pilot = NumeratorBandwidth::fixed(result.pilot_bandwidth);

  for (int rep = 0; rep < config.repetitions; ++rep) {
    const auto folds = make_folds(sample.size(), config.folds, derive_seed(config.seed, {0xCF, std::uint64_t(rep)}));
    const std::size_t diag_start = result.diagnostics.size();
    std::vector<FoldWork> work(config.folds);

    for (int k = 0; k < config.folds; ++k) {
      const DifferencedSample valid = sample.subset(folds[k]);
      const DifferencedSample train = sample.subset(complement(sample.size(), folds[k]));
      const IrregularSplit vs = split_irregular(valid, split_stayers(valid.x, fixed.tau_x));
      const IrregularSplit ts = split_irregular(train, split_stayers(train.x, fixed.tau_x));

      FoldDiagnostics d;
      d.repetition = rep;
      d.fold = k;
      d.training_movers = ts.mover_x.size();
      d.validation_movers = vs.mover_x.size();
      d.validation_stayers = vs.stayer_x.size();
      if (vs.mover_x.empty()) {
        result.diagnostics.push_back(d);
        check_repetition(result.diagnostics, diag_start, config, rep);
      }
      if (vs.stayer_x.empty() || ts.stayer_x.empty() || ts.mover_x.empty()) {
        throw InfeasibleError(FeasibilityCondition::kEmptyEvaluationSet,
                              "repetition " + std::to_string(rep) + ", fold " + std::to_string(k) +
                                  (ts.mover_x.empty() ? ": no training movers" : ": no stayers on one side of the split"));
      }

      const HalfSpectrum vden = irregular_denominators(vs.stayer_y, vs.stayer_x, fixed.h0, vs.mover_x, grid);
      const HalfSpectrum vnum = irregular_numerators(vs.mover_ratio, vs.mover_x, pilot, grid);
      FirstStageTarget vt = combine_ratios(vnum, vden, fixed.tau_den, grid);
      work[k].train_den = irregular_denominators(ts.stayer_y, ts.stayer_x, fixed.h0, ts.mover_x, grid);

      d.rho = vt.overall_trim_fraction();
      d.min_retained = vt.min_retained();
      d.gamma = std::max(vt.instability(), max_inverse(work[k].train_den, fixed.tau_den));
      result.diagnostics.push_back(d);

      work[k].validation = std::move(vt.values);
      work[k].train_ratio = ts.mover_ratio;
      work[k].train_x = ts.mover_x;
    }
    check_repetition(result.diagnostics, diag_start, config, rep);

    std::vector<double> rep_loss(result.candidates.size(), 0.0);
    for (int k = 0; k < config.folds; ++k) {
      const FoldWork& w = work[k];
      score_fold(
          w, bandwidths, config.sieve_dimensions, sieve, grid,
          [&](const NumeratorBandwidth& bw) {
            const HalfSpectrum num = irregular_numerators(w.train_ratio, w.train_x, bw, grid);
            return combine_ratios(num, w.train_den, fixed.tau_den, grid).values;
          },
          rep_loss, result.failed_fits);
    }
    for (std::size_t c = 0; c < rep_loss.size(); ++c) {
      result.repetition_scores[c].push_back(rep_loss[c] / config.folds);
    }
  }
  finalize_scores(result, config);
  return result;
}

CvResult repeated_cv(const StackedSample& sample, const RegularFixed& fixed, const CvConfig& config,
                     const FrequencyGrid& grid) {
  sample.validate();
  config.validate();
  if (!(fixed.h_S > 0.0) || !(fixed.tau_den > 0.0)) throw InputError("h_S and tau_den must be positive");
  const RegularPrecompute full = precompute_regular(sample);

  CvResult result;
  result.reference_bandwidth = bivariate_reference_bandwidth(full);
  result.pilot_bandwidth = config.c_pilot * result.reference_bandwidth *
                           std::pow(static_cast<double>(full.size()), 1.0 / 6.0 - 1.0 / config.pilot_rate);
  result.candidates = build_candidates(config, result.reference_bandwidth, false);
  result.repetition_scores.assign(result.candidates.size(), {});

  const std::vector<NumeratorBandwidth> bandwidths = candidate_bandwidths(result.candidates, config);
  const SieveProblem sieve(grid, max_dimension(config));

  for (int rep = 0; rep < config.repetitions; ++rep) {
    const auto folds = make_folds(sample.size(), config.folds, derive_seed(config.seed, {0xCF, std::uint64_t(rep)}));
    const std::size_t diag_start = result.diagnostics.size();
    std::vector<FoldWork> work(config.folds);

    for (int k = 0; k < config.folds; ++k) {
      const RegularPrecompute vp = precompute_regular(sample.subset(folds[k]));
      RegularPrecompute tp = precompute_regular(sample.subset(complement(sample.size(), folds[k])));

      const HalfSpectrum vden = regular_denominators(vp, fixed.h_S, vp, grid);
      const HalfSpectrum vnum = regular_numerators(vp, result.pilot_bandwidth, grid);
      FirstStageTarget vt = combine_ratios(vnum, vden, fixed.tau_den, grid);
      work[k].train_den = regular_denominators(tp, fixed.h_S, tp, grid);

      FoldDiagnostics d;
      d.repetition = rep;
      d.fold = k;
      d.training_movers = tp.size();
      d.validation_movers = vp.size();
      d.rho = vt.overall_trim_fraction();
      d.min_retained = vt.min_retained();
      d.gamma = std::max(vt.instability(), max_inverse(work[k].train_den, fixed.tau_den));
      result.diagnostics.push_back(d);

      work[k].validation = std::move(vt.values);
      work[k].train_pre = std::move(tp);
    }
    check_repetition(result.diagnostics, diag_start, config, rep);

    std::vector<double> rep_loss(result.candidates.size(), 0.0);
    for (int k = 0; k < config.folds; ++k) {
      const FoldWork& w = work[k];
      score_fold(
          w, bandwidths, config.sieve_dimensions, sieve, grid,
          [&](const NumeratorBandwidth& bw) {
            const HalfSpectrum num = regular_numerators(w.train_pre, bw.h, grid);
            return combine_ratios(num, w.train_den, fixed.tau_den, grid).values;
          },
          rep_loss, result.failed_fits);
    }
    for (std::size_t c = 0; c < rep_loss.size(); ++c) {
      result.repetition_scores[c].push_back(rep_loss[c] / config.folds);
    }
  }
  finalize_scores(result, config);
  return result;
}

}  // namespace crc
