#include <random>

#include <benchmark/benchmark.h>

#include "stochlq/evaluate.hpp"
#include "stochlq/frequency.hpp"
#include "stochlq/lqr.hpp"
#include "stochlq/lyapunov.hpp"
#include "stochlq/montecarlo.hpp"
#include "stochlq/theta.hpp"

using namespace stochlq;

namespace {

// Hurwitz A with mean-square stable noise, reproducible per size.
SystemModel make_system(int n, int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto random = [&](int r, int c) {
    MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) M(i, j) = normal(rng);
    return M;
  };
  MatrixXd A = random(n, n);
  A.diagonal().array() -= A.eigenvalues().real().maxCoeff() + 1.0;
  std::vector<MatrixXd> Cs;
  for (int j = 0; j < d; ++j) Cs.push_back(0.2 * random(n, n) / std::sqrt(static_cast<double>(n)));
  return SystemModel(A, random(n, 1), Cs);
}

void BM_LyapunovSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto sys = make_system(n, 1, 1);
  const MatrixXd Q = MatrixXd::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(lyap_solve(sys.A(), Q));
}
BENCHMARK(BM_LyapunovSolve)->Arg(2)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_SolveThetaDirect(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto sys = make_system(n, 2, 2);
  const MatrixXd G = MatrixXd::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(solve_theta(sys, G, {ThetaMethod::Direct}));
}
BENCHMARK(BM_SolveThetaDirect)->Arg(2)->Arg(4)->Arg(8);

void BM_SolveThetaFixedPoint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto sys = make_system(n, 2, 2);
  const MatrixXd G = MatrixXd::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(solve_theta(sys, G, {ThetaMethod::FixedPoint}));
}
BENCHMARK(BM_SolveThetaFixedPoint)->Arg(2)->Arg(4)->Arg(8);

void BM_FrequencyCheck(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto sys = make_system(n, 1, 3);
  const auto theta = solve_theta(sys, MatrixXd::Identity(n, n));
  const MatrixXd Gamma = MatrixXd::Identity(1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(check_frequency_condition(sys, theta, Gamma));
}
BENCHMARK(BM_FrequencyCheck)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Riccati(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto sys = make_system(n, 1, 4);
  const auto theta = solve_theta(sys, MatrixXd::Identity(n, n));
  const MatrixXd Gamma = MatrixXd::Identity(1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_deterministic_lqr(sys, theta.Theta, Gamma));
}
BENCHMARK(BM_Riccati)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_CostPhi(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto sys = make_system(n, 1, 5);
  const CostModel cost(MatrixXd::Identity(n, n), MatrixXd::Identity(1, 1));
  const auto init = InitialState::deterministic(VectorXd::Ones(n));
  const auto theta = solve_theta(sys, cost.G());
  const auto law = solve_deterministic_lqr(sys, theta.Theta, cost.Gamma());
  const auto u = synthesize_control(law, init).feedback;
  for (auto _ : state) benchmark::DoNotOptimize(cost_phi(sys, cost, u, init));
}
BENCHMARK(BM_CostPhi)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

// Throughput in path-steps per second.
void BM_MonteCarlo(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto sys = make_system(n, 1, 6);
  const CostModel cost(MatrixXd::Identity(n, n), MatrixXd::Identity(1, 1));
  const auto init = InitialState::deterministic(VectorXd::Ones(n));
  SimulationConfig cfg;
  cfg.paths = 1000;
  cfg.dt = 1e-3;
  cfg.horizon = 1.0;
  cfg.workers = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_paths(sys, cost, ControlSignal::zero(1), init, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.paths) * 1000);
}
BENCHMARK(BM_MonteCarlo)->Args({1, 1})->Args({2, 1})->Args({4, 1})->Args({2, 4})->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
