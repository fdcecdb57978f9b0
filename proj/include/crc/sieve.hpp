#pragma once

// Constrained Hermite-sieve minimum-distance inversion of a first-stage target.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "crc/first_stage.hpp"
#include "crc/numerics.hpp"

namespace crc {

struct SieveCoefficients {
  Eigen::VectorXd pi;

  int dimension() const noexcept { return static_cast<int>(pi.size()); }
  HermiteBasis basis() const { return HermiteBasis(dimension()); }
};

struct NormalEquations {
  Eigen::MatrixXd omega;
  Eigen::VectorXd v;
};

/// A = Re z^S(0) (odd components vanish, even ones are real).
Eigen::VectorXd constraint_vector(int dimension);

/// Omega = sum_l w_l Re(z_l conj(z_l)'), V = Re(sum_l w_l conj(m_l) z_l).
NormalEquations assemble_normal_equations(const FirstStageTarget& target, int dimension);
NormalEquations assemble_normal_equations(const FrequencyGrid& grid, std::span<const Complex> values, int dimension);

/// Closed-form minimizer of pi' Omega pi - 2 V' pi subject to A' pi = 1.
/// Throws NumericalError when Omega is not safely positive definite.
SieveCoefficients solve_constrained(const Eigen::MatrixXd& omega, const Eigen::VectorXd& v, const Eigen::VectorXd& a);

/// sum_l w_l |phi_S(u_l; pi) - m_l|^2.
double sieve_criterion(const FrequencyGrid& grid, std::span<const Complex> values, const Eigen::VectorXd& pi);

/// phi_S(u; pi) = z^S(u)' pi at every grid node.
std::vector<Complex> sieve_cf(const FrequencyGrid& grid, const Eigen::VectorXd& pi);

/// f_S(b; pi) = q^S(b)' pi.
std::vector<double> sieve_density(std::span<const double> points, const Eigen::VectorXd& pi);

/// Sieve fits for every dimension up to a maximum on one frequency grid. The
/// basis matrix and Omega are built once; lower dimensions reuse leading blocks.
class SieveProblem {
 public:
  SieveProblem(const FrequencyGrid& grid, int max_dimension);

  int max_dimension() const noexcept { return max_dimension_; }
  const FrequencyGrid& grid() const noexcept { return grid_; }

  /// V for the full dimension; leading entries serve smaller fits.
  Eigen::VectorXd projection(std::span<const Complex> values) const;
  SieveCoefficients fit(const Eigen::VectorXd& projection, int dimension) const;
  SieveCoefficients fit(std::span<const Complex> values, int dimension) const;
  /// phi_S(u_l; pi) on the grid.
  std::vector<Complex> characteristic(const Eigen::VectorXd& pi) const;

 private:
  FrequencyGrid grid_;
  int max_dimension_;
  Eigen::MatrixXcd basis_;  // L x S_max, row l = z^S(u_l)'
  Eigen::MatrixXd omega_;
};

struct DensityEstimate {
  std::vector<double> eval_grid;
  std::vector<double> raw_values;
  std::vector<double> processed_values;
  double mean = 0.0;
  double variance = 0.0;
  double sd = 0.0;
  /// Mass of the raw sieve density outside the evaluation grid.
  double tail_mass = 0.0;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double sd = 0.0;
};

/// Truncate at zero and renormalize to unit trapezoid mass on `grid`.
std::vector<double> truncate_and_renormalize(std::span<const double> grid, std::span<const double> values);

/// Mean and variance by trapezoid integration.
Moments density_moments(std::span<const double> grid, std::span<const double> density);

DensityEstimate evaluate_and_postprocess(const SieveCoefficients& coeffs, std::span<const double> eval_grid);

/// Default evaluation grid: 401 points on [-3, 3].
std::vector<double> default_eval_grid();

}  // namespace crc
