#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "crc/error.hpp"
#include "crc/sieve.hpp"

using namespace crc;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

const FrequencyGrid& grid() {
  static const FrequencyGrid g = build_frequency_grid(4.0, 101, WeightKind::kStandardNormal);
  return g;
}

/// Random pi with A'pi = 1.
Eigen::VectorXd random_feasible(int s, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  const Eigen::VectorXd a = constraint_vector(s);
  Eigen::VectorXd pi(s);
  for (int i = 0; i < s; ++i) pi[i] = z(rng);
  pi += (1.0 - a.dot(pi)) / a.squaredNorm() * a;
  return pi;
}

/// Random direction in the null space of A'.
Eigen::VectorXd random_tangent(int s, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  const Eigen::VectorXd a = constraint_vector(s);
  Eigen::VectorXd d(s);
  for (int i = 0; i < s; ++i) d[i] = z(rng);
  return d - a.dot(d) / a.squaredNorm() * a;
}

}  // namespace

TEST_CASE("constraint vector") {
  const Eigen::VectorXd a = constraint_vector(6);
  for (int s = 0; s < 6; ++s) {
    const Complex z = sieve_fourier_basis(HermiteBasis(6), 0.0)[s];
    CHECK(a[s] == Approx(z.real()).epsilon(1e-15));
    CHECK(z.imag() == 0.0);
    if (s % 2 == 1) CHECK(a[s] == 0.0);
  }
}

TEST_CASE("normal equations") {
  const std::vector<Complex> zeros(grid().size(), 0.0);
  const NormalEquations one = assemble_normal_equations(grid(), zeros, 1);
  double expected = 0.0;
  for (std::size_t l = 0; l < grid().size(); ++l) {
    expected += grid().weights[l] * std::pow(hermite_q(0, grid().nodes[l]), 2);
  }
  CHECK(one.omega(0, 0) == Approx(2 * kPi * expected).epsilon(1e-13));
  CHECK(one.v[0] == 0.0);

  const NormalEquations eq = assemble_normal_equations(grid(), zeros, 8);
  CHECK(std::abs(eq.omega(0, 1)) < 1e-12);
  CHECK(eq.v.isZero(0.0));
  CHECK((eq.omega - eq.omega.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(eq.omega);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("constraint holds on random positive definite systems") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 12);
  for (int trial = 0; trial < 100; ++trial) {
    const int s = dim(rng);
    Eigen::MatrixXd m(s, s);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) m(i, j) = z(rng);
    const Eigen::MatrixXd omega = m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(s, s);
    Eigen::VectorXd v(s);
    for (int i = 0; i < s; ++i) v[i] = 3.0 * z(rng);
    const Eigen::VectorXd a = constraint_vector(s);
    const SieveCoefficients pi = solve_constrained(omega, v, a);
    CHECK(std::abs(a.dot(pi.pi) - 1.0) <= 1e-12);
  }
}

TEST_CASE("exact recovery from a noiseless target") {
  std::mt19937_64 rng(7);
  for (int s : {1, 3, 5, 7, 9}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd star = random_feasible(s, rng);
      const std::vector<Complex> m = sieve_cf(grid(), star);
      const NormalEquations eq = assemble_normal_equations(grid(), m, s);
      const SieveCoefficients pi = solve_constrained(eq.omega, eq.v, constraint_vector(s));
      CHECK((pi.pi - star).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("S = 1 forces the standard normal density") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Complex> junk(grid().size());
  for (auto& c : junk) c = Complex(z(rng), z(rng));
  const NormalEquations eq = assemble_normal_equations(grid(), junk, 1);
  const SieveCoefficients pi = solve_constrained(eq.omega, eq.v, constraint_vector(1));
  CHECK(pi.pi[0] == Approx(1.0 / (std::sqrt(2 * kPi) * std::pow(kPi, -0.25))).epsilon(1e-14));

  const std::vector<double> b = linspace(-8.0, 8.0, 1601);
  const DensityEstimate d = evaluate_and_postprocess(pi, b);
  for (std::size_t i = 0; i < b.size(); i += 100) {
    CHECK(d.raw_values[i] == Approx(std::exp(-b[i] * b[i] / 2) / std::sqrt(2 * kPi)).epsilon(1e-12));
    CHECK(d.processed_values[i] == Approx(d.raw_values[i]).epsilon(1e-6));
  }
  CHECK(std::abs(d.mean) < 1e-3);
  CHECK(std::abs(d.variance - 1.0) < 1e-3);

  // The standard normal characteristic function is fitted with zero residual.
  std::vector<Complex> normal(grid().size());
  for (std::size_t l = 0; l < grid().size(); ++l) normal[l] = std::exp(-0.5 * grid().nodes[l] * grid().nodes[l]);
  const NormalEquations eqn = assemble_normal_equations(grid(), normal, 1);
  const SieveCoefficients fit = solve_constrained(eqn.omega, eqn.v, constraint_vector(1));
  CHECK(sieve_criterion(grid(), normal, fit.pi) < 1e-28);
}

TEST_CASE("first-order optimality on the constraint set") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z(0.0, 0.3);
  for (int s : {2, 4, 7}) {
    std::vector<Complex> m(grid().size());
    for (std::size_t l = 0; l < m.size(); ++l) {
      const double u = grid().nodes[l];
      m[l] = std::exp(Complex(-0.4 * u * u, 0.5 * u)) + Complex(z(rng), z(rng));
    }
    const NormalEquations eq = assemble_normal_equations(grid(), m, s);
    const SieveCoefficients pi = solve_constrained(eq.omega, eq.v, constraint_vector(s));
    const double base = sieve_criterion(grid(), m, pi.pi);
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd d = random_tangent(s, rng);
      for (double eps : {1e-4, -1e-4}) CHECK(sieve_criterion(grid(), m, pi.pi + eps * d) >= base);
    }
  }
}

TEST_CASE("ill-conditioned systems are rejected") {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Identity(3, 3);
  omega(2, 2) = 1e-14;
  CHECK_THROWS_WITH_AS(solve_constrained(omega, Eigen::VectorXd::Zero(3), constraint_vector(3)),
                       doctest::Contains("ill-conditioned"), NumericalError);
  CHECK_THROWS_AS(solve_constrained(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2), constraint_vector(2)),
                  NumericalError);
}

TEST_CASE("sieve problem blocks agree with direct assembly") {
  std::vector<Complex> m(grid().size());
  for (std::size_t l = 0; l < m.size(); ++l) m[l] = std::exp(Complex(-0.3 * grid().nodes[l] * grid().nodes[l], 0.2));
  const SieveProblem problem(grid(), 9);
  const Eigen::VectorXd proj = problem.projection(m);
  for (int s : {1, 3, 6, 9}) {
    const NormalEquations eq = assemble_normal_equations(grid(), m, s);
    const SieveCoefficients direct = solve_constrained(eq.omega, eq.v, constraint_vector(s));
    const SieveCoefficients block = problem.fit(proj, s);
    CHECK((direct.pi - block.pi).cwiseAbs().maxCoeff() < 1e-12);
    const auto phi = problem.characteristic(block.pi);
    const auto ref = sieve_cf(grid(), block.pi);
    for (std::size_t l = 0; l < m.size(); ++l) CHECK(std::abs(phi[l] - ref[l]) < 1e-12);
  }
}

TEST_CASE("post-processing") {
  const std::vector<double> b = default_eval_grid();
  CHECK(b.size() == 401);
  CHECK(b.front() == -3.0);
  CHECK(b.back() == 3.0);

  std::mt19937_64 rng(5);
  const Eigen::VectorXd pi = random_feasible(7, rng);
  const DensityEstimate d = evaluate_and_postprocess(SieveCoefficients{pi}, b);
  const auto direct = sieve_density(b, pi);
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(d.processed_values[i] >= 0.0);
    double raw = 0.0;
    for (int s = 0; s < 7; ++s) raw += pi[s] * hermite_q(s, b[i]);
    CHECK(d.raw_values[i] == Approx(raw).epsilon(1e-12));
    CHECK(direct[i] == d.raw_values[i]);
  }
  CHECK(trapezoid(b, d.processed_values) == Approx(1.0).epsilon(1e-8));
  const auto twice = truncate_and_renormalize(b, d.processed_values);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(twice[i] == Approx(d.processed_values[i]).epsilon(1e-14));

  // Even coefficients only: symmetric density, zero mean.
  Eigen::VectorXd even = Eigen::VectorXd::Zero(5);
  even[0] = 0.4;
  even[2] = 0.1;
  even[4] = -0.05;
  even += (1.0 - constraint_vector(5).dot(even)) / constraint_vector(5).squaredNorm() * constraint_vector(5);
  const DensityEstimate sym = evaluate_and_postprocess(SieveCoefficients{even}, b);
  CHECK(std::abs(sym.mean) < 1e-10);

  CHECK_THROWS_WITH_AS(truncate_and_renormalize(b, std::vector<double>(b.size(), -1.0)),
                       doctest::Contains("degenerate density"), NumericalError);
  CHECK_THROWS_AS(evaluate_and_postprocess(SieveCoefficients{pi}, std::vector<double>{1.0, 0.0}), InputError);
}

TEST_CASE("criterion approximates 2 pi times the L2 density distance under flat weights") {
  FrequencyGrid flat;
  flat.cutoff = 15.0;
  flat.nodes = linspace(-15.0, 15.0, 3001);
  flat.step = flat.nodes[1] - flat.nodes[0];
  flat.weights.assign(flat.nodes.size(), flat.step);
  flat.weights.front() *= 0.5;
  flat.weights.back() *= 0.5;

  std::mt19937_64 rng(9);
  const Eigen::VectorXd p1 = random_feasible(6, rng);
  const Eigen::VectorXd p2 = random_feasible(6, rng);
  const double crit = sieve_criterion(flat, sieve_cf(flat, p2), p1);
  const std::vector<double> b = linspace(-15.0, 15.0, 6001);
  const auto f1 = sieve_density(b, p1), f2 = sieve_density(b, p2);
  std::vector<double> sq(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) sq[i] = (f1[i] - f2[i]) * (f1[i] - f2[i]);
  CHECK(crit == Approx(2 * kPi * trapezoid(b, sq)).epsilon(0.05));
}
