#include <doctest.h>

#include <cmath>
#include <cstring>

#include "fixtures.hpp"
#include "stochlq/errors.hpp"
#include "stochlq/montecarlo.hpp"

using namespace stochlq;

TEST_CASE("noise-free paths are identical and match the deterministic integral") {
  const SystemModel sys(fixture::scalar(-1.0), fixture::scalar(1.0), {fixture::scalar(0.0)});
  SimulationConfig cfg;
  cfg.paths = 16;
  cfg.dt = 1e-3;
  cfg.horizon = 20.0;
  cfg.keep_path_costs = true;
  const auto est = simulate_paths(sys, fixture::scalar_cost(1.0, 1.0), ControlSignal::zero(1), fixture::scalar_init(1.0), cfg);
  CHECK(est.std_error == 0.0);
  for (double c : est.path_costs) CHECK(c == est.path_costs.front());
  // ∫ e^{-2t} = 1/2; left Riemann sums of Euler steps are O(dt) off.
  CHECK(std::abs(est.mean_cost - 0.5) <= 2e-3);
}

TEST_CASE("scalar zero-control cost agrees with ρ = 1") {
  const auto sys = fixture::scalar_system(1.0, 1.0);
  SimulationConfig cfg;
  cfg.paths = 20000;
  cfg.dt = 2e-3;
  cfg.horizon = 12.0;
  cfg.seed = 7;
  const auto est = simulate_paths(sys, fixture::scalar_cost(1.0, 1.0), ControlSignal::zero(1), fixture::scalar_init(1.0), cfg);
  CHECK(est.std_error > 0.0);
  CHECK(std::abs(est.mean_cost - 1.0) <= 4.0 * est.std_error);
}

TEST_CASE("results do not depend on the worker count") {
  const auto sys = fixture::scalar_system(1.0, 1.0);
  SimulationConfig cfg;
  cfg.paths = 999;
  cfg.dt = 1e-2;
  cfg.horizon = 5.0;
  cfg.seed = 42;
  cfg.keep_path_costs = true;
  const auto cost = fixture::scalar_cost(1.0, 1.0);
  const auto one = simulate_paths(sys, cost, ControlSignal::zero(1), fixture::scalar_init(1.0), cfg);
  cfg.workers = 8;
  const auto eight = simulate_paths(sys, cost, ControlSignal::zero(1), fixture::scalar_init(1.0), cfg);
  CHECK(std::memcmp(&one.mean_cost, &eight.mean_cost, sizeof(double)) == 0);
  CHECK(std::memcmp(&one.std_error, &eight.std_error, sizeof(double)) == 0);
  CHECK(one.path_costs == eight.path_costs);

  cfg.seed = 43;
  CHECK(simulate_paths(sys, cost, ControlSignal::zero(1), fixture::scalar_init(1.0), cfg).mean_cost != one.mean_cost);
}

TEST_CASE("standard error scales like paths^{-1/2}") {
  const auto sys = fixture::scalar_system(1.0, 0.5);
  const auto cost = fixture::scalar_cost(1.0, 1.0);
  SimulationConfig cfg;
  cfg.dt = 1e-2;
  cfg.horizon = 8.0;
  cfg.paths = 2000;
  const double small = simulate_paths(sys, cost, ControlSignal::zero(1), fixture::scalar_init(1.0), cfg).std_error;
  cfg.paths = 8000;
  const double large = simulate_paths(sys, cost, ControlSignal::zero(1), fixture::scalar_init(1.0), cfg).std_error;
  CHECK(small / large == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("antithetic pairs") {
  const auto sys = fixture::scalar_system(1.0, 0.5);
  SimulationConfig cfg;
  cfg.paths = 2000;
  cfg.dt = 1e-2;
  cfg.horizon = 8.0;
  cfg.antithetic = true;
  const auto est = simulate_paths(sys, fixture::scalar_cost(1.0, 1.0), ControlSignal::zero(1), fixture::scalar_init(1.0), cfg);
  CHECK(est.paths == 2000);
  // ρ = a²/(2α − c²) = 1/1.75.
  CHECK(std::abs(est.mean_cost - 1.0 / 1.75) <= 4.0 * est.std_error + 1e-2);
  cfg.paths = 3;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("random initial state uses its covariance") {
  const auto sys = fixture::scalar_system(1.0, 0.0);
  const InitialState init(VectorXd::Constant(1, 1.0), MatrixXd::Constant(1, 1, 2.0));
  SimulationConfig cfg;
  cfg.paths = 20000;
  cfg.dt = 1e-2;
  cfg.horizon = 10.0;
  const auto est = simulate_paths(sys, fixture::scalar_cost(1.0, 1.0), ControlSignal::zero(1), init, cfg);
  // E a² / 2 = 1 with left Riemann bias of about dt/2.
  CHECK(std::abs(est.mean_cost - 1.0) <= 4.0 * est.std_error + 1e-2);
}

TEST_CASE("configuration and overflow errors") {
  const auto sys = fixture::scalar_system(1.0, 1.0);
  const auto cost = fixture::scalar_cost(1.0, 1.0);
  SimulationConfig cfg;
  cfg.paths = 0;
  CHECK_THROWS_AS(simulate_paths(sys, cost, ControlSignal::zero(1), fixture::scalar_init(1.0), cfg), ConfigError);
  cfg.paths = 10;
  cfg.dt = 2.0;
  cfg.horizon = 1.0;
  CHECK_THROWS_AS(simulate_paths(sys, cost, ControlSignal::zero(1), fixture::scalar_init(1.0), cfg), ConfigError);
  cfg.dt = -1.0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  const SystemModel stiff(fixture::scalar(-100.0), fixture::scalar(1.0), {fixture::scalar(0.0)});
  SimulationConfig big;
  big.paths = 4;
  big.dt = 0.1;
  big.horizon = 20.0;
  CHECK_THROWS_AS(simulate_paths(stiff, cost, ControlSignal::zero(1), fixture::scalar_init(1.0), big), OverflowError);
}

TEST_CASE("warning for a destabilizing step") {
  const SystemModel stiff(fixture::scalar(-100.0), fixture::scalar(1.0), {fixture::scalar(0.0)});
  SimulationConfig cfg;
  cfg.paths = 2;
  cfg.dt = 0.021;
  cfg.horizon = 0.1;
  const auto est = simulate_paths(stiff, fixture::scalar_cost(1.0, 1.0), ControlSignal::zero(1), fixture::scalar_init(1.0), cfg);
  CHECK(est.warnings.size() == 1);
}
