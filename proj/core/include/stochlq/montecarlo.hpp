#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stochlq/control.hpp"
#include "stochlq/model.hpp"

namespace stochlq {

struct SimulationConfig {
  std::size_t paths = 10000;
  double dt = 1e-3;
  double horizon = 10.0;
  std::uint64_t seed = 0;
  bool antithetic = false;  // pair path 2k+1 with the negated increments of path 2k
  unsigned workers = 1;     // results do not depend on this
  bool keep_path_costs = false;
  double overflow_factor = 1e8;  // abort when |x| exceeds this multiple of the initial scale
};

struct CostEstimate {
  double mean_cost = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  double dt = 0.0;
  std::vector<double> path_costs;  // filled when keep_path_costs
  std::vector<std::string> warnings;
};

/// Counter-based generator: the k-th draw of stream `key` is a SplitMix64
/// finalizer applied to key + k·φ. Streams are pure functions of
/// (seed, path index), so paths can be simulated in any order.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Throws ConfigError when the configuration is invalid.
void validate_config(const SimulationConfig& cfg);

/// Euler–Maruyama estimate of Φ[u] truncated at cfg.horizon:
/// x_{k+1} = x_k + (Ax_k + bu(t_k))dt + Σ_j C_j x_k ΔW_k^{(j)},
/// cost Σ_k [x_kᵀGx_k + u(t_k)ᵀΓu(t_k)]·dt. Random initial states are drawn as
/// N(E a, Cov a): every cost depends on a only through its first two
/// moments, so any law with those moments gives the same Φ.
/// The estimate is bitwise identical for a fixed seed whatever cfg.workers is.
/// Throws ConfigError and OverflowError.
CostEstimate simulate_paths(const SystemModel& sys, const CostModel& cost, const ControlSignal& u,
                            const InitialState& init, const SimulationConfig& cfg);

/// CSV `path_index,cost`.
void write_path_costs_csv(const std::filesystem::path& path, const std::vector<double>& costs);

}  // namespace stochlq
