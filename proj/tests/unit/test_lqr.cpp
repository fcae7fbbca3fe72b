#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "stochlq/errors.hpp"
#include "stochlq/lqr.hpp"

using namespace stochlq;

TEST_CASE("scalar Riccati closed form") {
  const auto sys = fixture::scalar_system(1.0, 1.0);
  const auto law = solve_deterministic_lqr(sys, fixture::scalar(2.0), fixture::scalar(1.0));
  const double P = std::sqrt(3.0) - 1.0;
  CHECK(law.P(0, 0) == doctest::Approx(P).epsilon(1e-12));
  CHECK(law.h(0, 0) == doctest::Approx(-P).epsilon(1e-12));
  CHECK(law.A_cl(0, 0) == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-12));
  CHECK(law.riccati_residual <= 1e-12);
}

TEST_CASE("zero state weight gives the zero law") {
  MatrixXd A(2, 2);
  A << -1, 1, 0, -2;
  const SystemModel sys(A, MatrixXd::Ones(2, 1), {MatrixXd::Zero(2, 2)});
  const auto law = solve_deterministic_lqr(sys, MatrixXd::Zero(2, 2), fixture::scalar(1.0));
  CHECK(law.P.norm() <= 1e-12);
  CHECK(law.h.norm() <= 1e-12);
  CHECK((law.A_cl - A).norm() <= 1e-12);
}

TEST_CASE("random instances: residual and closed-loop spectrum") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = oracle::random_instance(rng, {2, 1, 1});
    const auto theta = solve_theta(inst.sys, inst.cost.G());
    const auto law = solve_deterministic_lqr(inst.sys, theta.Theta, inst.cost.Gamma());
    CHECK(law.riccati_residual <= 1e-9);
    CHECK(law.closed_loop_abscissa < 0.0);
    CHECK(law.A_cl.eigenvalues().real().maxCoeff() < 0.0);
  }
}

TEST_CASE("indefinite Θ with positive Π still admits a stabilizing solution") {
  const auto sys = fixture::scalar_system(1.0, 1.0);
  const auto law = solve_deterministic_lqr(sys, fixture::scalar(-2.0), fixture::scalar(3.0));
  CHECK(law.closed_loop_abscissa < 0.0);
  CHECK(law.riccati_residual <= 1e-12);
  // 2aP − P²/Γ + Θ = 0 with a = −1: P² + 6P + 6 = 0, stabilizing root −3 + √3.
  CHECK(law.P(0, 0) == doctest::Approx(-3.0 + std::sqrt(3.0)));
}

TEST_CASE("frequency gate") {
  const auto sys = fixture::scalar_system(1.0, 1.0);
  const auto theta = solve_theta(sys, fixture::scalar(-1.0));
  const auto boundary = check_frequency_condition(sys, theta, fixture::scalar(2.0));
  REQUIRE(boundary.verdict == FrequencyVerdict::NonnegativeOnly);
  CHECK_THROWS_AS(solve_optimal_law(sys, theta, fixture::scalar(2.0), boundary), GateError);
  LqrOptions reg;
  reg.regularization = 1e-3;
  CHECK(solve_optimal_law(sys, theta, fixture::scalar(2.0), boundary, reg).closed_loop_abscissa < 0.0);

  const auto fails = check_frequency_condition(sys, theta, fixture::scalar(1.0));
  REQUIRE(fails.verdict == FrequencyVerdict::Fails);
  CHECK_THROWS_AS(solve_optimal_law(sys, theta, fixture::scalar(1.0), fails, reg), GateError);
}

TEST_CASE("singular input weight") {
  const auto sys = fixture::scalar_system(1.0, 1.0);
  CHECK_THROWS_AS(solve_deterministic_lqr(sys, fixture::scalar(2.0), fixture::scalar(0.0)), SingularError);
}

TEST_CASE("no stabilizing solution: uncontrollable unstable mode") {
  MatrixXd A(2, 2);
  A << 1, 0, 0, -1;
  MatrixXd b(2, 1);
  b << 0, 1;
  const SystemModel sys(A, b, {MatrixXd::Zero(2, 2)});
  CHECK_THROWS_AS(solve_deterministic_lqr(sys, MatrixXd::Identity(2, 2), fixture::scalar(1.0)), RiccatiError);
}

TEST_CASE("synthesized control") {
  const auto sys = fixture::scalar_system(1.0, 1.0);
  const auto law = solve_deterministic_lqr(sys, fixture::scalar(2.0), fixture::scalar(1.0));
  const auto ctl = synthesize_control(law, fixture::scalar_init(1.0));
  const double P = std::sqrt(3.0) - 1.0;
  for (double t : {0.0, 0.3, 1.0, 4.0}) {
    CHECK(ctl.feedback.value(t)(0) == doctest::Approx(-P * std::exp(-std::sqrt(3.0) * t)).epsilon(1e-12));
  }
  CHECK(std::exp(-std::sqrt(3.0) * ctl.horizon) <= 1e-8);

  CHECK(synthesize_control(law, fixture::scalar_init(0.0)).feedback.value(0.5).norm() == 0.0);

  FeedbackLaw zero = law;
  zero.h.setZero();
  CHECK(synthesize_control(zero, fixture::scalar_init(1.0)).feedback.value(0.5).norm() == 0.0);

  SynthesisOptions sampled;
  sampled.sampled = true;
  sampled.dt = 0.01;
  const auto s = synthesize_control(law, fixture::scalar_init(1.0), sampled);
  REQUIRE(s.sampled.has_value());
  CHECK(s.sampled->value(0.5)(0) == doctest::Approx(ctl.feedback.value(0.5)(0)).epsilon(1e-12));

  SynthesisOptions short_horizon;
  short_horizon.horizon = 1.0;
  short_horizon.require_decay = true;
  CHECK_THROWS_AS(synthesize_control(law, fixture::scalar_init(1.0), short_horizon), HorizonError);
}
