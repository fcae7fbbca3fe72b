#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "stochlq/errors.hpp"
#include "stochlq/frequency.hpp"

using namespace stochlq;

TEST_CASE("Hermitian form examples") {
  using cd = std::complex<double>;
  VectorXcd x(2);
  x << cd(1, 0), cd(0, 1);
  VectorXcd u(1);
  u << cd(1, 0);
  CHECK(hermitian_form_F(MatrixXd::Identity(2, 2), MatrixXd::Identity(1, 1), x, u) == doctest::Approx(3.0));

  VectorXcd x1(1);
  x1 << cd(1, 0);
  CHECK(hermitian_form_F(fixture::scalar(2.0), fixture::scalar(1.0), x1, u) == doctest::Approx(3.0));
  CHECK(hermitian_form_F(MatrixXd::Zero(2, 2), MatrixXd::Zero(1, 1), x, u) == 0.0);
  CHECK_THROWS_AS(hermitian_form_F(MatrixXd::Identity(3, 3), MatrixXd::Identity(1, 1), x, u), DimensionError);
}

TEST_CASE("Π in the scalar example") {
  const auto sys = fixture::scalar_system(1.0, 1.0);
  const auto theta = solve_theta(sys, fixture::scalar(1.0));
  CHECK(pi_matrix(sys, theta, fixture::scalar(1.0), 0.0)(0, 0).real() == doctest::Approx(3.0));
  CHECK(std::abs(pi_matrix(sys, theta, fixture::scalar(1.0), 1e6)(0, 0).real() - 1.0) <= 1e-11);
  for (double lambda : {0.0, 0.5, 2.0, 17.0}) {
    CHECK(pi_matrix(sys, theta, fixture::scalar(1.0), lambda)(0, 0).real() ==
          doctest::Approx(2.0 / (1.0 + lambda * lambda) + 1.0));
  }
}

TEST_CASE("Π = Γ when b = 0") {
  const SystemModel sys(fixture::scalar(-1.0), fixture::scalar(0.0), {fixture::scalar(1.0)});
  const auto theta = solve_theta(sys, fixture::scalar(5.0));
  for (double lambda : {0.0, 1.0, 100.0}) {
    CHECK(pi_matrix(sys, theta, fixture::scalar(0.3), lambda)(0, 0).real() == doctest::Approx(0.3));
  }
}

TEST_CASE("frequency verdicts in the scalar example") {
  const auto sys = fixture::scalar_system(1.0, 1.0);
  const auto pos = solve_theta(sys, fixture::scalar(1.0));
  const auto neg = solve_theta(sys, fixture::scalar(-1.0));

  const auto r1 = check_frequency_condition(sys, pos, fixture::scalar(1.0));
  CHECK(r1.verdict == FrequencyVerdict::StrictlyPositive);
  CHECK(r1.delta_hat == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::isinf(r1.lambda_argmin));

  const auto r2 = check_frequency_condition(sys, neg, fixture::scalar(2.0));
  CHECK(r2.verdict == FrequencyVerdict::NonnegativeOnly);
  CHECK(std::abs(r2.delta_hat) <= 1e-6);
  CHECK(r2.lambda_argmin == doctest::Approx(0.0));

  const auto r3 = check_frequency_condition(sys, neg, fixture::scalar(3.0));
  CHECK(r3.verdict == FrequencyVerdict::StrictlyPositive);
  CHECK(r3.delta_hat == doctest::Approx(1.0).epsilon(1e-6));
  double argmin = -1.0;
  const double grid = oracle::frequency_grid_min(sys.A(), sys.b(), neg.Theta, fixture::scalar(3.0), 1e-3, 50.0, &argmin);
  CHECK(r3.delta_hat <= grid + 1e-12);
  CHECK(r3.delta_hat >= grid - 1e-6);

  CHECK(check_frequency_condition(sys, neg, fixture::scalar(1.5)).verdict == FrequencyVerdict::Fails);
}

TEST_CASE("certified bound never exceeds a dense-grid minimum") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    const auto inst = oracle::random_instance(rng, {2, 2, 1, false});
    const auto theta = solve_theta(inst.sys, inst.cost.G());
    const auto report = check_frequency_condition(inst.sys, theta, inst.cost.Gamma());
    const double grid = oracle::frequency_grid_min(inst.sys.A(), inst.sys.b(), theta.Theta, inst.cost.Gamma(), 1e-3,
                                                   std::min(report.lambda_max, 60.0));
    const double limit = min_eigenvalue(inst.cost.Gamma());
    const double best = std::min(grid, limit);
    CHECK(report.delta_hat <= best + 1e-12);
    CHECK(report.delta_hat >= best - 1e-6 * std::max(1.0, std::abs(best)));
  }
}
