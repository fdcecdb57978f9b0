#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "crc/simulation.hpp"
#include "crc/stats.hpp"
#include "crc/tuning_cv.hpp"
#include "gate_datasets.hpp"

using namespace crc;
using doctest::Approx;

namespace {

CvCandidate cand(double h, int s) { return {NumeratorBandwidth::fixed(h), s}; }

FoldDiagnostics diag(int fold, std::size_t movers, double rho, double gamma, std::size_t retained) {
  FoldDiagnostics d;
  d.fold = fold;
  d.validation_movers = movers;
  d.rho = rho;
  d.gamma = gamma;
  d.min_retained = retained;
  return d;
}

FeasibilityCondition gate_of(const testing::GateCase& g) {
  try {
    repeated_cv(g.sample, g.fixed, g.config, g.grid);
  } catch (const InfeasibleError& e) {
    return e.condition();
  }
  FAIL("cross-validation passed every gate");
  return FeasibilityCondition::kEmptyEvaluationSet;
}

}  // namespace

TEST_CASE("pilot bandwidth") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(1000);
  for (auto& v : x) v = z(rng);
  const double scale = std::min(stats::sample_sd(x), stats::iqr(x) / 1.34);
  const double g = pilot_bandwidth(x, 2.0, 7.0);
  CHECK(g == Approx(2.0 * 0.9 * scale * std::pow(1000.0, -1.0 / 7.0)).epsilon(1e-14));
  CHECK(g > stats::silverman_bandwidth(x));

  for (std::size_t n : {2, 10, 1000, 100000, 1000000}) {
    std::vector<double> w(n);
    for (auto& v : w) v = z(rng);
    CHECK(pilot_bandwidth(w, 1.5, 7.0) > stats::silverman_bandwidth(w));
  }
  CHECK_THROWS_AS(pilot_bandwidth(std::vector<double>{1.0}, 2.0, 7.0), InputError);
  CHECK_THROWS_AS(pilot_bandwidth(std::vector<double>{1.0, 1.0, 1.0}, 2.0, 7.0), InputError);
}

TEST_CASE("feasibility gates on constructed diagnostics") {
  const std::vector<FoldDiagnostics> ok{diag(0, 10, 0.1, 5.0, 3), diag(1, 12, 0.2, 8.0, 1)};
  CHECK(feasibility_check(ok, 100.0, 0.5).pass);

  auto empty = ok;
  empty[1].validation_movers = 0;
  auto v = feasibility_check(empty, 100.0, 0.5);
  CHECK_FALSE(v.pass);
  CHECK(v.condition == FeasibilityCondition::kEmptyEvaluationSet);
  CHECK(std::string(to_string(v.condition)) == "empty evaluation set");

  auto trim = ok;
  trim[0].rho = 0.95;  // mean 0.575
  v = feasibility_check(trim, 100.0, 0.5);
  CHECK(v.condition == FeasibilityCondition::kExcessiveTrimming);
  trim[0].rho = 0.8;  // mean exactly 0.5 passes
  CHECK(feasibility_check(trim, 100.0, 0.5).pass);

  auto gamma = ok;
  gamma[1].gamma = 100.5;
  v = feasibility_check(gamma, 100.0, 0.5);
  CHECK(v.condition == FeasibilityCondition::kExplodingInstability);
  gamma[1].gamma = 100.0;
  CHECK(feasibility_check(gamma, 100.0, 0.5).pass);

  auto degenerate = ok;
  degenerate[0].min_retained = 0;
  v = feasibility_check(degenerate, 100.0, 0.5);
  CHECK(v.condition == FeasibilityCondition::kDegenerateFrequency);

  CHECK_FALSE(feasibility_check(std::vector<FoldDiagnostics>{}, 100.0, 0.5).pass);
}

TEST_CASE("fold loss") {
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  std::vector<Complex> a{{1, 0}, {0.5, 0.5}, {0, 1}, {-1, 0.2}};
  CHECK(cv_fold_loss(a, a, w) == 0.0);
  auto b = a;
  b[2] += Complex(0.7, 0.0);
  CHECK(cv_fold_loss(a, b, w) == Approx(0.3 * 0.49).epsilon(1e-15));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Complex> p(50), q(50);
  std::vector<double> ww(50);
  double brute = 0.0;
  for (int j = 0; j < 50; ++j) {
    p[j] = {z(rng), z(rng)};
    q[j] = {z(rng), z(rng)};
    ww[j] = std::abs(z(rng));
    const double dr = p[j].real() - q[j].real(), di = p[j].imag() - q[j].imag();
    brute += ww[j] * (dr * dr + di * di);
  }
  CHECK(cv_fold_loss(p, q, ww) == Approx(brute).epsilon(1e-13));
  CHECK(cv_fold_loss(p, q, ww) >= 0.0);
  CHECK_THROWS_AS(cv_fold_loss(a, std::span<const Complex>(b.data(), 3), w), InputError);
}

TEST_CASE("one standard error rule") {
  SUBCASE("clear winner") {
    const std::vector<CvCandidate> c{cand(1, 3), cand(2, 5), cand(3, 7)};
    const auto s = one_se_select(std::vector<double>{5.0, 1.0, 4.0}, std::vector<double>{0.1, 0.1, 0.1}, c);
    CHECK(s.selected == 1);
    CHECK(s.best == 1);
    CHECK(s.set == std::vector<std::size_t>{1});
  }
  SUBCASE("constructed scores") {
    const std::vector<CvCandidate> c{cand(1, 3), cand(2, 9), cand(2, 5)};
    const std::vector<double> mean{1.00, 1.04, 1.03}, se{0.05, 0.05, 0.05};
    const auto s = one_se_select(mean, se, c);
    CHECK(s.set.size() == 3);
    CHECK(c[s.selected] == cand(2, 5));

    // Any ordering of the candidates selects the same one.
    std::vector<std::size_t> perm{0, 1, 2};
    do {
      std::vector<CvCandidate> pc;
      std::vector<double> pm, ps;
      for (std::size_t i : perm) {
        pc.push_back(c[i]);
        pm.push_back(mean[i]);
        ps.push_back(se[i]);
      }
      const auto t = one_se_select(pm, ps, pc);
      CHECK(pc[t.selected] == cand(2, 5));
      CHECK(t.set.size() == 3);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  SUBCASE("equal losses favour the larger bandwidth") {
    const std::vector<CvCandidate> c{cand(0.5, 3), cand(1.0, 3)};
    const auto s = one_se_select(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 0.0}, c);
    CHECK(s.set.size() == 2);
    CHECK(s.selected == 1);
  }
  SUBCASE("equal bandwidth ties go to the smaller S") {
    const std::vector<CvCandidate> c{cand(2, 7), cand(2, 5), cand(1, 3)};
    const auto s = one_se_select(std::vector<double>{1.0, 1.01, 1.5}, std::vector<double>{0.02, 0.02, 0.02}, c);
    CHECK(c[s.selected] == cand(2, 5));
  }
  SUBCASE("k-NN smoothing grows with k") {
    const std::vector<CvCandidate> c{{NumeratorBandwidth::nearest_neighbor(5), 9},
                                     {NumeratorBandwidth::nearest_neighbor(20), 9}};
    const auto s = one_se_select(std::vector<double>{1.0, 1.05}, std::vector<double>{0.1, 0.1}, c);
    CHECK(s.selected == 1);
  }
  SUBCASE("without SE the rule reduces to the argmin") {
    const std::vector<CvCandidate> c{cand(1, 3), cand(2, 5)};
    const auto s = one_se_select(std::vector<double>{1.0, 1.01}, std::vector<double>{0.5, 0.5}, c, false);
    CHECK(s.selected == 0);
  }
  SUBCASE("failed candidates are skipped") {
    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<CvCandidate> c{cand(1, 3), cand(2, 5)};
    CHECK(one_se_select(std::vector<double>{1.0, inf}, std::vector<double>{0.1, inf}, c).selected == 0);
    CHECK_THROWS_AS(one_se_select(std::vector<double>{inf, inf}, std::vector<double>{inf, inf}, c), NumericalError);
  }
}

TEST_CASE("fold partitions") {
  for (std::size_t n : {10u, 11u, 2000u}) {
    for (int k : {2, 5, 10}) {
      const auto folds = make_folds(n, k, 99);
      std::vector<int> seen(n, 0);
      std::size_t lo = n, hi = 0;
      for (const auto& f : folds) {
        lo = std::min(lo, f.size());
        hi = std::max(hi, f.size());
        for (std::size_t i : f) ++seen[i];
      }
      CHECK(hi - lo <= 1);
      CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
      CHECK(make_folds(n, k, 99) == folds);
    }
  }
  CHECK(make_folds(2000, 5, 1) != make_folds(2000, 5, 2));
  CHECK_THROWS_AS(make_folds(3, 5, 1), InputError);
  CHECK_THROWS_AS(make_folds(10, 1, 1), InputError);
}

TEST_CASE("repeated cross-validation on a simulated sample") {
  const DgpSpec spec = dgp_preset("a");
  const SimulatedData data = simulate(spec, 1000, 4);
  const double tau = tau_x_rule(data.sample.x, 4.0);
  const IrregularFixed fixed{tau, tau, 1e-4};
  const FrequencyGrid grid = build_frequency_grid(4.0, 101, WeightKind::kStandardNormal);

  CvConfig base;
  base.repetitions = 2;
  base.gamma_max = 1e6;
  base.bandwidths = {0.6};
  base.sieve_dimensions = {3};

  SUBCASE("single candidate") {
    const CvResult r = repeated_cv(data.sample, fixed, base, grid);
    CHECK(r.selected == cand(0.6, 3));
    CHECK(r.one_se_set.size() == 1);
    CHECK(r.diagnostics.size() == 10);
    CHECK(std::isfinite(r.mean_scores[0]));
  }

  SUBCASE("scores do not depend on the rest of the candidate grid") {
    CvConfig wide = base;
    wide.bandwidths = {0.3, 0.6, 1.2};
    wide.sieve_dimensions = {3, 5, 7};
    const CvResult small = repeated_cv(data.sample, fixed, base, grid);
    const CvResult large = repeated_cv(data.sample, fixed, wide, grid);
    REQUIRE(large.candidates.size() == 9);
    CHECK(large.candidates[3] == cand(0.6, 3));
    CHECK(large.repetition_scores[3] == small.repetition_scores[0]);
    CHECK(std::find(large.one_se_set.begin(), large.one_se_set.end(), large.selected) != large.one_se_set.end());
    CHECK(large.pilot_bandwidth > large.reference_bandwidth);
    for (std::size_t c = 0; c < large.candidates.size(); ++c) {
      CHECK(large.se_scores[c] >= 0.0);
      CHECK(large.mean_scores[c] ==
            Approx((large.repetition_scores[c][0] + large.repetition_scores[c][1]) / 2).epsilon(1e-15));
    }
  }

  SUBCASE("seeded reproducibility") {
    CvConfig k = base;
    k.bandwidths.clear();
    k.knn = {5, 20};
    const CvResult a = repeated_cv(data.sample, fixed, k, grid);
    const CvResult b = repeated_cv(data.sample, fixed, k, grid);
    CHECK(a.repetition_scores == b.repetition_scores);
    CHECK(a.selected == b.selected);
  }

  SUBCASE("every candidate failing is reported") {
    CvConfig huge = base;
    huge.sieve_dimensions = {60};
    CHECK_THROWS_AS(repeated_cv(data.sample, fixed, huge, grid), NumericalError);
  }
}

TEST_CASE("purpose-built samples trip the named gate") {
  for (auto c : {FeasibilityCondition::kEmptyEvaluationSet, FeasibilityCondition::kExcessiveTrimming,
                 FeasibilityCondition::kExplodingInstability, FeasibilityCondition::kDegenerateFrequency}) {
    CAPTURE(to_string(c));
    CHECK(gate_of(testing::gate_case(c)) == c);
  }
}
