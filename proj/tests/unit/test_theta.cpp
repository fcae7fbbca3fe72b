#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "stochlq/errors.hpp"
#include "stochlq/theta.hpp"

using namespace stochlq;

TEST_CASE("noise operator in the scalar example") {
  const auto sys = fixture::scalar_system(1.0, 1.0);
  CHECK(apply_T(sys, fixture::scalar(1.0))(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(quadrature_T(sys, fixture::scalar(1.0), 1e-8)(0, 0) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("noise-free system has T = 0") {
  MatrixXd A(2, 2);
  A << -1, 2, 0, -3;
  const SystemModel sys(A, MatrixXd::Ones(2, 1), {MatrixXd::Zero(2, 2)});
  const MatrixXd W = MatrixXd::Identity(2, 2);
  CHECK(apply_T(sys, W).norm() == 0.0);
  CHECK(quadrature_T(sys, W, 1e-8).norm() == 0.0);

  const MatrixXd G = (MatrixXd(2, 2) << 1, 0.5, 0.5, -2).finished();
  CHECK(solve_theta(sys, G).Theta == G);
}

TEST_CASE("apply_T matches frequency-domain quadrature on random instances") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto inst = oracle::random_instance(rng, {2, 1, 1});
    const MatrixXd W = oracle::random_spd(rng, 2);
    const MatrixXd T = apply_T(inst.sys, W);
    const MatrixXd Q = quadrature_T(inst.sys, W, 1e-8);
    CHECK((T - Q).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, T.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("quadrature tolerance range is enforced") {
  const auto sys = fixture::scalar_system(1.0, 1.0);
  CHECK_THROWS_AS(quadrature_T(sys, fixture::scalar(1.0), 0.1), InputError);
  CHECK_THROWS_AS(quadrature_T(sys, fixture::scalar(1.0), 1e-14), InputError);
  CHECK_THROWS_AS(quadrature_T(sys, fixture::scalar(1.0), 1e-10, {50}), ConvergenceError);
}

TEST_CASE("scalar Θ = γG with γ = 2") {
  for (double G : {1.0, -1.0}) {
    const auto sys = fixture::scalar_system(1.0, 1.0);
    for (auto method : {ThetaMethod::Direct, ThetaMethod::FixedPoint}) {
      const auto sol = solve_theta(sys, fixture::scalar(G), {method, 1e-14});
      CHECK(std::abs(sol.Theta(0, 0) - 2.0 * G) <= 1e-12 * 2.0);
      CHECK(sol.X(0, 0) == doctest::Approx(G));
    }
  }
}

TEST_CASE("Direct and FixedPoint agree; Gramian identity holds") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = oracle::random_instance(rng, {2, 1, 2});
    const auto direct = solve_theta(inst.sys, inst.cost.G(), {ThetaMethod::Direct});
    const auto fixed = solve_theta(inst.sys, inst.cost.G(), {ThetaMethod::FixedPoint, 1e-12});
    CHECK((direct.Theta - fixed.Theta).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, direct.Theta.norm()));
    CHECK(direct.residual_gramian <= 1e-10);
    CHECK(fixed.iterations > 0);
    const MatrixXd ref = oracle::theta(inst.sys, inst.cost.G());
    CHECK((direct.Theta - ref).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("unstable system: Direct singular at the boundary, FixedPoint diverges") {
  const auto boundary = fixture::scalar_system(1.0, std::sqrt(2.0));
  CHECK_THROWS_AS(solve_theta(boundary, fixture::scalar(1.0), {ThetaMethod::Direct}), SingularError);
  const auto beyond = fixture::scalar_system(1.0, 1.6);
  CHECK_THROWS_AS(solve_theta(beyond, fixture::scalar(1.0), {ThetaMethod::FixedPoint}), ConvergenceError);
}

TEST_CASE("fixed point iteration cap") {
  const auto slow = fixture::scalar_system(1.0, 1.4);
  CHECK_THROWS_AS(solve_theta(slow, fixture::scalar(1.0), {ThetaMethod::FixedPoint, 1e-12, 5}), ConvergenceError);
}
