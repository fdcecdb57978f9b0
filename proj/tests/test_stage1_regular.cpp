#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <random>

#include "crc/error.hpp"
#include "crc/reference.hpp"
#include "crc/stage1_regular.hpp"

using namespace crc;
using doctest::Approx;

namespace {

const FrequencyGrid& grid() {
  static const FrequencyGrid g = build_frequency_grid(4.0, 101, WeightKind::kStandardNormal);
  return g;
}

StackedSample synthetic(std::size_t n, std::uint64_t seed, double beta_sd = 0.6, double d_sd = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  StackedSample s;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = z(rng), x2 = 0.5 * x1 + z(rng);
    const double b = 0.5 + beta_sd * z(rng);
    s.x1.push_back(x1);
    s.x2.push_back(x2);
    s.y1.push_back(b * x1 + d_sd * z(rng));
    s.y2.push_back(b * x2 + d_sd * z(rng));
  }
  return s;
}

}  // namespace

TEST_CASE("precompute on simple units") {
  const RegularPrecompute p = precompute_regular(StackedSample{{0.3, 1.0}, {-0.8, 1.0}, {1.0, 1.0}, {0.0, 1.0}, {}});
  CHECK(p.lambda1[0] == 0.0);
  CHECK(p.lambda2[0] == -1.0);
  CHECK(p.dir1[0] == 0.0);
  CHECK(p.dir2[0] == -1.0);
  CHECK(p.zstar[0] == Approx(0.8));
  CHECK(p.transformed[0] == Approx(0.3));
  CHECK(p.transformed[1] == Approx(1.0));
  CHECK(p.zstar[1] == 0.0);
}

TEST_CASE("precompute invariants on random units") {
  const StackedSample s = synthetic(300, 2);
  const RegularPrecompute p = precompute_regular(s);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double xx = s.x1[i] * s.x1[i] + s.x2[i] * s.x2[i];
    CHECK(std::abs(p.lambda1[i] * s.x1[i] + p.lambda2[i] * s.x2[i]) <= 1e-12 * xx);
    CHECK(std::abs(std::hypot(p.dir1[i], p.dir2[i]) - 1.0) <= 1e-12);
    CHECK(p.norm[i] > 0.0);
    CHECK(p.zstar[i] * p.norm[i] == Approx(s.x2[i] * s.y1[i] - s.x1[i] * s.y2[i]).epsilon(1e-12));
    CHECK(p.transformed[i] == Approx((s.x1[i] * s.y1[i] + s.x2[i] * s.y2[i]) / xx).epsilon(1e-12));
  }
}

TEST_CASE("directional denominator") {
  const StackedSample s = synthetic(50, 4);
  const RegularPrecompute p = precompute_regular(s);
  CHECK(phi_D_hat_directional(p, 0.2, 0.0, 0.0) == Complex(1.0, 0.0));
  for (double a : {0.1, 1.3, 2.9}) {
    const Complex v = phi_D_hat_directional(p, 0.3, std::cos(a) * 2.0, std::sin(a) * 2.0);
    CHECK(std::abs(v) <= 1.0 + 1e-12);
  }

  // Single unit: point mass at its own direction.
  const RegularPrecompute one = precompute_regular(StackedSample{{1.0}, {2.0}, {0.6}, {0.8}, {}});
  const double r = 1.7;
  const Complex v = phi_D_hat_directional(one, 0.1, r * one.dir1[0], r * one.dir2[0]);
  CHECK(std::abs(v - std::exp(Complex(0.0, r * one.zstar[0]))) < 1e-14);

  // All Z* = 0: Y proportional to X for every unit.
  StackedSample prop;
  for (int i = 0; i < 20; ++i) {
    prop.x1.push_back(std::cos(0.3 * i));
    prop.x2.push_back(std::sin(0.3 * i) + 0.1);
    prop.y1.push_back(0.7 * prop.x1.back());
    prop.y2.push_back(0.7 * prop.x2.back());
  }
  const RegularPrecompute pp = precompute_regular(prop);
  for (double a : {0.0, 1.0, 4.0}) {
    CHECK(std::abs(phi_D_hat_directional(pp, 0.4, 3.0 * std::cos(a), 3.0 * std::sin(a)) - 1.0) < 1e-14);
  }
}

TEST_CASE("anchors: m(0) = 1 and Hermitian symmetry") {
  const StackedSample s = synthetic(600, 7);
  const FirstStageTarget t = first_stage_regular(s, RegularConfig{0.15, 0.4, 1e-4}, grid());
  const std::size_t z = grid().zero_index();
  CHECK(t.values[z] == Complex(1.0, 0.0));
  CHECK(t.unit_count == s.size());
  for (std::size_t l = 0; l < grid().size(); ++l) {
    CHECK(std::abs(t.values[l] - std::conj(t.values[grid().size() - 1 - l])) <= 1e-12);
  }
}

TEST_CASE("kernels match the serial reference") {
  const StackedSample s = synthetic(300, 12);
  const RegularConfig c{0.2, 0.35, 1e-4};
  const FirstStageTarget fast = first_stage_regular(s, c, grid());
  const FirstStageTarget slow = reference::first_stage_regular(s, c, grid());
  for (std::size_t l = 0; l < grid().size(); ++l) {
    CHECK(std::abs(fast.values[l] - slow.values[l]) < 1e-10);
    CHECK(fast.retained_count[l] == slow.retained_count[l]);
  }
}

TEST_CASE("results do not depend on the worker count") {
  const StackedSample s = synthetic(500, 13);
  const RegularConfig c{0.2, 0.35, 1e-4};
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const FirstStageTarget serial = first_stage_regular(s, c, grid());
  omp_set_num_threads(3);
  const FirstStageTarget parallel = first_stage_regular(s, c, grid());
  omp_set_num_threads(saved);
  for (std::size_t l = 0; l < grid().size(); ++l) CHECK(serial.values[l] == parallel.values[l]);
}

TEST_CASE("sign coherence") {
  const StackedSample s = synthetic(400, 14);
  StackedSample neg = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    neg.x1[i] = -s.x1[i];
    neg.x2[i] = -s.x2[i];
    neg.y1[i] = -s.y1[i];
    neg.y2[i] = -s.y2[i];
  }
  const RegularPrecompute a = precompute_regular(s), b = precompute_regular(neg);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(b.transformed[i] == Approx(a.transformed[i]).epsilon(1e-14));
    // X2 Y1 - X1 Y2 is quadratic in the sign flip, so Z* is unchanged and only the direction turns.
    CHECK(b.zstar[i] == Approx(a.zstar[i]).epsilon(1e-14));
    CHECK(b.dir1[i] == -a.dir1[i]);
    CHECK(b.dir2[i] == -a.dir2[i]);
  }
  const RegularConfig c{0.2, 0.4, 1e-4};
  const FirstStageTarget ta = first_stage_regular(s, c, grid()), tb = first_stage_regular(neg, c, grid());
  for (std::size_t l = 0; l < grid().size(); ++l) {
    CHECK(std::abs(std::abs(ta.values[l]) - std::abs(tb.values[l])) < 1e-10);
    CHECK(std::abs(ta.values[l] - tb.values[l]) < 1e-10);
  }
}

TEST_CASE("constant coefficient: phase of m equals u b0 at low frequency") {
  const StackedSample s = synthetic(3000, 15, 0.0, 0.01);
  const FirstStageTarget t = first_stage_regular(s, RegularConfig{0.15, 0.3, 1e-4}, grid());
  for (std::size_t l = grid().zero_index() + 1; l < grid().size(); ++l) {
    const double u = grid().nodes[l];
    if (u > 1.0) break;
    CHECK(std::arg(t.values[l]) == Approx(0.5 * u).epsilon(0.02));
    CHECK(std::abs(t.values[l]) == Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("trimming is monotone in tau_den") {
  const StackedSample s = synthetic(400, 16, 0.6, 1.5);
  std::vector<double> previous(grid().size(), 0.0);
  for (double tau : {1e-6, 1e-3, 1e-2, 0.1, 0.3}) {
    const FirstStageTarget t = first_stage_regular(s, RegularConfig{0.1, 0.4, tau}, grid());
    for (std::size_t l = 0; l < grid().size(); ++l) {
      CHECK(t.trim_fraction[l] >= previous[l]);
      previous[l] = t.trim_fraction[l];
    }
  }
}

TEST_CASE("bandwidth rules") {
  const StackedSample s = synthetic(500, 18);
  const RegularPrecompute p = precompute_regular(s);
  CHECK(directional_bandwidth(p) > 0.0);
  CHECK(bivariate_reference_bandwidth(p) > 0.0);
  CHECK_THROWS_AS(RegularConfig({0.0, 0.2, 1e-4}).validate(), InputError);
}
