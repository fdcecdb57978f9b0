#include "crc/sieve.hpp"

#include <cmath>
#include <numbers>

#include "crc/error.hpp"

namespace crc {

namespace {

constexpr double kMaxCondition = 1e12;

}  // namespace

Eigen::VectorXd constraint_vector(int dimension) {
  const auto z = HermiteBasis(dimension).fourier(0.0);
  Eigen::VectorXd a(dimension);
  for (int s = 0; s < dimension; ++s) a[s] = z[s].real();
  return a;
}

NormalEquations assemble_normal_equations(const FrequencyGrid& grid, std::span<const Complex> values, int dimension) {
  if (values.size() != grid.size()) throw InputError("first-stage values do not match the frequency grid");
  if (grid.size() < static_cast<std::size_t>(dimension)) throw InputError("frequency grid has fewer nodes than the sieve dimension");
  const HermiteBasis basis(dimension);
  NormalEquations eq{Eigen::MatrixXd::Zero(dimension, dimension), Eigen::VectorXd::Zero(dimension)};
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const auto z = basis.fourier(grid.nodes[l]);
    const double w = grid.weights[l];
    const Complex mbar = std::conj(values[l]);
    for (int s = 0; s < dimension; ++s) {
      eq.v[s] += w * (mbar * z[s]).real();
      for (int t = 0; t < dimension; ++t) eq.omega(s, t) += w * (z[s] * std::conj(z[t])).real();
    }
  }
  return eq;
}

NormalEquations assemble_normal_equations(const FirstStageTarget& target, int dimension) {
  return assemble_normal_equations(target.grid, target.values, dimension);
}

SieveCoefficients solve_constrained(const Eigen::MatrixXd& omega, const Eigen::VectorXd& v, const Eigen::VectorXd& a) {
  const Eigen::Index n = omega.rows();
  if (omega.cols() != n || v.size() != n || a.size() != n) throw InputError("sieve system: dimension mismatch");
  if (!omega.allFinite() || !v.allFinite()) throw NumericalError("sieve system has non-finite entries");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(omega, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    throw NumericalError("ill-conditioned sieve system: reduce S or enlarge grid");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(omega);
  if (llt.info() != Eigen::Success) throw NumericalError("ill-conditioned sieve system: reduce S or enlarge grid");

  const Eigen::VectorXd x = llt.solve(v);
  const Eigen::VectorXd y = llt.solve(a);
  const double ay = a.dot(y);
  Eigen::VectorXd pi = x + ((1.0 - a.dot(x)) / ay) * y;
  // One correction step along the same direction removes residual roundoff in A'pi.
  pi += ((1.0 - a.dot(pi)) / ay) * y;
  return {pi};
}

std::vector<Complex> sieve_cf(const FrequencyGrid& grid, const Eigen::VectorXd& pi) {
  const HermiteBasis basis(static_cast<int>(pi.size()));
  std::vector<Complex> out(grid.size());
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const auto z = basis.fourier(grid.nodes[l]);
    Complex acc;
    for (Eigen::Index s = 0; s < pi.size(); ++s) acc += z[s] * pi[s];
    out[l] = acc;
  }
  return out;
}

double sieve_criterion(const FrequencyGrid& grid, std::span<const Complex> values, const Eigen::VectorXd& pi) {
  const auto phi = sieve_cf(grid, pi);
  double acc = 0.0;
  for (std::size_t l = 0; l < grid.size(); ++l) acc += grid.weights[l] * std::norm(phi[l] - values[l]);
  return acc;
}

std::vector<double> sieve_density(std::span<const double> points, const Eigen::VectorXd& pi) {
  const int dim = static_cast<int>(pi.size());
  std::vector<double> q(dim);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    hermite_q_all(dim, points[i], q);
    double acc = 0.0;
    for (int s = 0; s < dim; ++s) acc += pi[s] * q[s];
    out[i] = acc;
  }
  return out;
}

SieveProblem::SieveProblem(const FrequencyGrid& grid, int max_dimension)
    : grid_(grid), max_dimension_(max_dimension) {
  if (max_dimension < 1) throw InputError("sieve dimension must be at least 1");
  if (grid.size() < static_cast<std::size_t>(max_dimension)) {
    throw InputError("frequency grid has fewer nodes than the sieve dimension");
  }
  const HermiteBasis basis(max_dimension);
  basis_.resize(static_cast<Eigen::Index>(grid.size()), max_dimension);
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const auto z = basis.fourier(grid.nodes[l]);
    for (int s = 0; s < max_dimension; ++s) basis_(static_cast<Eigen::Index>(l), s) = z[s];
  }
  omega_ = Eigen::MatrixXd::Zero(max_dimension, max_dimension);
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const double w = grid.weights[l];
    const auto row = basis_.row(static_cast<Eigen::Index>(l));
    for (int s = 0; s < max_dimension; ++s) {
      for (int t = 0; t < max_dimension; ++t) omega_(s, t) += w * (row[s] * std::conj(row[t])).real();
    }
  }
}

Eigen::VectorXd SieveProblem::projection(std::span<const Complex> values) const {
  if (values.size() != grid_.size()) throw InputError("first-stage values do not match the frequency grid");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(max_dimension_);
  for (std::size_t l = 0; l < grid_.size(); ++l) {
    const double w = grid_.weights[l];
    const Complex mbar = std::conj(values[l]);
    for (int s = 0; s < max_dimension_; ++s) v[s] += w * (mbar * basis_(static_cast<Eigen::Index>(l), s)).real();
  }
  return v;
}

SieveCoefficients SieveProblem::fit(const Eigen::VectorXd& projection, int dimension) const {
  if (dimension < 1 || dimension > max_dimension_) throw InputError("sieve dimension out of range");
  return solve_constrained(omega_.topLeftCorner(dimension, dimension), projection.head(dimension),
                           constraint_vector(dimension));
}

SieveCoefficients SieveProblem::fit(std::span<const Complex> values, int dimension) const {
  return fit(projection(values), dimension);
}

std::vector<Complex> SieveProblem::characteristic(const Eigen::VectorXd& pi) const {
  if (pi.size() > max_dimension_) throw InputError("coefficient vector longer than the sieve problem");
  const Eigen::VectorXcd phi = basis_.leftCols(pi.size()) * pi.cast<Complex>();
  return {phi.data(), phi.data() + phi.size()};
}

std::vector<double> truncate_and_renormalize(std::span<const double> grid, std::span<const double> values) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] > 0.0 ? values[i] : 0.0;
  const double mass = trapezoid(grid, out);
  if (!(mass > 0.0) || !std::isfinite(mass)) throw NumericalError("degenerate density");
  for (double& v : out) v /= mass;
  return out;
}

Moments density_moments(std::span<const double> grid, std::span<const double> density) {
  std::vector<double> b1(grid.size()), b2(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    b1[i] = grid[i] * density[i];
    b2[i] = grid[i] * grid[i] * density[i];
  }
  Moments m;
  m.mean = trapezoid(grid, b1);
  m.variance = trapezoid(grid, b2) - m.mean * m.mean;
  m.sd = m.variance > 0.0 ? std::sqrt(m.variance) : 0.0;
  return m;
}

DensityEstimate evaluate_and_postprocess(const SieveCoefficients& coeffs, std::span<const double> eval_grid) {
  if (eval_grid.size() < 2) throw InputError("evaluation grid needs at least two points");
  for (std::size_t i = 1; i < eval_grid.size(); ++i) {
    if (!(eval_grid[i] > eval_grid[i - 1])) throw InputError("evaluation grid must be increasing");
  }
  DensityEstimate d;
  d.eval_grid.assign(eval_grid.begin(), eval_grid.end());
  d.raw_values = sieve_density(eval_grid, coeffs.pi);
  d.processed_values = truncate_and_renormalize(eval_grid, d.raw_values);
  const Moments m = density_moments(eval_grid, d.processed_values);
  d.mean = m.mean;
  d.variance = m.variance;
  d.sd = m.sd;
  d.tail_mass = 1.0 - trapezoid(eval_grid, d.raw_values);
  return d;
}

std::vector<double> default_eval_grid() { return linspace(-3.0, 3.0, 401); }

}  // namespace crc
