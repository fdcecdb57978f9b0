#include "crc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "crc/error.hpp"

namespace crc {

const char* to_string(FeasibilityCondition c) {
  switch (c) {
    case FeasibilityCondition::kEmptyEvaluationSet:
      return "empty evaluation set";
    case FeasibilityCondition::kExcessiveTrimming:
      return "excessive trimming";
    case FeasibilityCondition::kExplodingInstability:
      return "exploding instability";
    case FeasibilityCondition::kDegenerateFrequency:
      return "degenerate frequency";
  }
  return "unknown";
}

namespace {

// pi^{-1/4}
const double kQ0Scale = std::pow(std::numbers::pi, -0.25);

}  // namespace

void hermite_q_all(int count, double v, std::span<double> out) {
  if (count <= 0) return;
  if (out.size() < static_cast<std::size_t>(count)) {
    throw std::invalid_argument("hermite_q_all: output span too small");
  }
  double prev = 0.0;
  double cur = kQ0Scale * std::exp(-0.5 * v * v);
  out[0] = cur;
  for (int s = 0; s + 1 < count; ++s) {
    const double next = v * std::sqrt(2.0 / (s + 1)) * cur - std::sqrt(static_cast<double>(s) / (s + 1)) * prev;
    prev = cur;
    cur = next;
    out[s + 1] = cur;
  }
}

std::vector<double> hermite_q_all(int count, double v) {
  std::vector<double> out(static_cast<std::size_t>(std::max(count, 0)));
  hermite_q_all(count, v, out);
  return out;
}

double hermite_q(int s, double v) {
  if (s < 0) throw std::invalid_argument("hermite_q: negative index");
  double prev = 0.0;
  double cur = kQ0Scale * std::exp(-0.5 * v * v);
  for (int k = 0; k < s; ++k) {
    const double next = v * std::sqrt(2.0 / (k + 1)) * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

HermiteBasis::HermiteBasis(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw InputError("sieve dimension must be at least 1");
}

std::vector<double> HermiteBasis::evaluate(double b) const { return hermite_q_all(dimension_, b); }

std::vector<Complex> HermiteBasis::fourier(double u) const {
  static const double root_two_pi = std::sqrt(2.0 * std::numbers::pi);
  const auto q = hermite_q_all(dimension_, u);
  std::vector<Complex> z(q.size());
  for (std::size_t s = 0; s < q.size(); ++s) {
    const double a = root_two_pi * q[s];
    // i^s cycles through 1, i, -1, -i
    switch (s % 4) {
      case 0: z[s] = {a, 0.0}; break;
      case 1: z[s] = {0.0, a}; break;
      case 2: z[s] = {-a, 0.0}; break;
      default: z[s] = {0.0, -a}; break;
    }
  }
  return z;
}

std::vector<Complex> sieve_fourier_basis(const HermiteBasis& basis, double u) { return basis.fourier(u); }

Complex ecf(std::span<const double> values, double point) {
  if (values.empty()) throw InputError("empty sample");
  double re = 0.0;
  double im = 0.0;
  for (double x : values) {
    const double t = point * x;
    re += std::cos(t);
    im += std::sin(t);
  }
  const double n = static_cast<double>(values.size());
  return {re / n, im / n};
}

Complex weighted_ecf(std::span<const double> values, std::span<const double> weights, double point) {
  if (values.empty()) throw InputError("empty sample");
  if (weights.size() != values.size()) throw InputError("weights and values differ in length");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("unnormalized weights");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10) throw InputError("unnormalized weights");
  double re = 0.0;
  double im = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double t = point * values[j];
    re += weights[j] * std::cos(t);
    im += weights[j] * std::sin(t);
  }
  return {re, im};
}

std::vector<double> gaussian_kernel_weights(std::span<const double> anchors, double center, double bandwidth) {
  if (anchors.empty()) throw InputError("gaussian_kernel_weights: no anchors");
  if (!(bandwidth > 0.0)) throw InputError("gaussian_kernel_weights: bandwidth must be positive");
  std::vector<double> w(anchors.size());
  double total = 0.0;
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    w[j] = gaussian_kernel((anchors[j] - center) / bandwidth);
    total += w[j];
  }
  if (!(total > 0.0)) throw NumericalError("empty kernel neighborhood");
  for (double& x : w) x /= total;
  return w;
}

std::string to_string(WeightKind kind) {
  return kind == WeightKind::kStandardNormal ? "standard-normal" : "student-t-3";
}

WeightKind weight_kind_from_string(const std::string& name) {
  if (name == "standard-normal" || name == "normal") return WeightKind::kStandardNormal;
  if (name == "student-t-3" || name == "t3") return WeightKind::kStudentT3;
  throw InputError("unknown weight kind '" + name + "'");
}

double weight_density(WeightKind kind, double u) {
  if (kind == WeightKind::kStandardNormal) {
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  }
  // Student t, 3 degrees of freedom: 2 / (pi sqrt 3) (1 + u^2/3)^{-2}
  const double a = 1.0 + u * u / 3.0;
  return 2.0 / (std::numbers::pi * std::sqrt(3.0)) / (a * a);
}

FrequencyGrid build_frequency_grid(double cutoff, int count, WeightKind kind) {
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw InputError("frequency cutoff must be positive");
  if (count < 3) throw InputError("frequency grid needs at least 3 nodes");
  if (count % 2 == 0) throw InputError("frequency grid size must be odd so that 0 is a node");

  FrequencyGrid g;
  g.cutoff = cutoff;
  g.kind = kind;
  const int half = count / 2;
  g.step = cutoff / half;
  g.nodes.resize(count);
  g.weights.resize(count);
  for (int k = 0; k <= half; ++k) {
    const double u = (k == half) ? cutoff : k * g.step;
    g.nodes[half + k] = u;
    g.nodes[half - k] = -u;
  }
  for (int l = 0; l < count; ++l) {
    const double end = (l == 0 || l == count - 1) ? 0.5 : 1.0;
    g.weights[l] = end * g.step * weight_density(kind, g.nodes[l]);
  }
  return g;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw InputError("linspace needs at least two points");
  std::vector<double> out(n);
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo + i * step;
  out[n - 1] = hi;
  return out;
}

}  // namespace crc
