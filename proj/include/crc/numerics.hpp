#pragma once

// Special functions and Fourier-domain primitives shared by the estimators.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace crc {

using Complex = std::complex<double>;

/// Orthonormal Hermite function q_s(v) = (2^s s! sqrt(pi))^{-1/2} exp(-v^2/2) H_s(v).
///
/// Evaluated with the normalized three-term recurrence, so no factorials or raw
/// polynomial values are ever formed; stable for s in the thousands.
double hermite_q(int s, double v);

/// q_0(v), ..., q_{count-1}(v) in one pass of the recurrence.
void hermite_q_all(int count, double v, std::span<double> out);
std::vector<double> hermite_q_all(int count, double v);

class HermiteBasis {
 public:
  explicit HermiteBasis(int dimension);

  int dimension() const noexcept { return dimension_; }

  /// Density-side basis vector q^S(b).
  std::vector<double> evaluate(double b) const;

  /// Fourier-side basis vector z^S(u), component s = sqrt(2 pi) i^s q_s(u).
  std::vector<Complex> fourier(double u) const;

 private:
  int dimension_;
};

/// z^S(u) for a basis of the given dimension.
std::vector<Complex> sieve_fourier_basis(const HermiteBasis& basis, double u);

/// Unweighted empirical characteristic function (1/n) sum_j exp(i t x_j).
Complex ecf(std::span<const double> values, double point);

/// sum_j w_j exp(i t x_j); weights must be nonnegative and sum to one.
Complex weighted_ecf(std::span<const double> values, std::span<const double> weights, double point);

/// exp(-z^2 / 2); the normalizing constant cancels in every ratio we form.
inline double gaussian_kernel(double z) noexcept { return std::exp(-0.5 * z * z); }

/// Nadaraya-Watson weights K_h(a_j - center) / sum_s K_h(a_s - center), Gaussian K.
std::vector<double> gaussian_kernel_weights(std::span<const double> anchors, double center,
                                            double bandwidth);

enum class WeightKind { kStandardNormal, kStudentT3 };

std::string to_string(WeightKind kind);
WeightKind weight_kind_from_string(const std::string& name);

/// Density nu_0 used to weight the frequency criterion.
double weight_density(WeightKind kind, double u);

/// Equally spaced, symmetric frequency grid on [-cutoff, cutoff] carrying trapezoid
/// weights multiplied by the weighting density. The middle node is exactly 0.
struct FrequencyGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double cutoff = 0.0;
  double step = 0.0;
  WeightKind kind = WeightKind::kStandardNormal;

  std::size_t size() const noexcept { return nodes.size(); }
  /// Index of the node u = 0.
  std::size_t zero_index() const noexcept { return nodes.size() / 2; }
  /// Number of nodes with u >= 0 (including 0).
  std::size_t half_size() const noexcept { return nodes.size() / 2 + 1; }
};

FrequencyGrid build_frequency_grid(double cutoff, int count, WeightKind kind);

/// Composite trapezoid rule on a (possibly nonuniform) increasing grid.
double trapezoid(std::span<const double> x, std::span<const double> y);

/// n equally spaced points on [lo, hi].
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace crc
