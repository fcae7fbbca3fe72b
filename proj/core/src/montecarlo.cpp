#include "stochlq/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <boost/random/normal_distribution.hpp>

#include "stochlq/errors.hpp"
#include "stochlq/stability.hpp"

namespace stochlq {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Fixed pairwise tree over [first, last): the association order depends only
// on the length, never on how the paths were scheduled.
double pairwise_sum(const double* first, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += first[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(first, half) + pairwise_sum(first + half, count - half);
}

std::size_t step_count(const SimulationConfig& cfg) {
  const double ratio = cfg.horizon / cfg.dt;
  return static_cast<std::size_t>(std::ceil(ratio - 1e-9 * ratio));
}

// Everything a path needs, in flat row-major arrays so the inner loop does
// no allocation.
struct PathKernel {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t steps = 0;
  double dt = 0.0;
  double sqrt_dt = 0.0;
  double guard = 0.0;
  std::vector<double> A;      // n×n
  std::vector<double> C;      // d×n×n
  std::vector<double> G;      // n×n
  std::vector<double> drift;  // steps×n, b·u(t_k)
  VectorXd mean;
  MatrixXd factor;  // covariance square root, empty when deterministic
  double control_cost = 0.0;
};

void copy_row_major(const MatrixXd& M, double* out) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) *out++ = M(i, j);
}

// Returns the path cost, or NaN if the norm guard tripped.
double run_path(const PathKernel& k, std::uint64_t seed, std::uint64_t stream, double sign,
                std::vector<double>& x, std::vector<double>& next, std::vector<double>& z) {
  CounterRng rng(seed, stream);
  boost::random::normal_distribution<double> normal;
  const std::size_t n = k.n;

  if (k.factor.size() == 0) {
    for (std::size_t i = 0; i < n; ++i) x[i] = k.mean(static_cast<Eigen::Index>(i));
  } else {
    VectorXd w(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) w(static_cast<Eigen::Index>(i)) = sign * normal(rng);
    const VectorXd x0 = k.mean + k.factor * w;
    for (std::size_t i = 0; i < n; ++i) x[i] = x0(static_cast<Eigen::Index>(i));
  }

  const double guard2 = k.guard * k.guard;
  double state_cost = 0.0;
  for (std::size_t s = 0; s < k.steps; ++s) {
    double quad = 0.0;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0;
      for (std::size_t j = 0; j < n; ++j) gx += k.G[i * n + j] * x[j];
      quad += x[i] * gx;
      norm2 += x[i] * x[i];
    }
    if (!(norm2 <= guard2)) return std::numeric_limits<double>::quiet_NaN();
    state_cost += quad;

    for (std::size_t j = 0; j < k.d; ++j) z[j] = sign * k.sqrt_dt * normal(rng);
    const double* bu = k.drift.data() + s * n;
    for (std::size_t i = 0; i < n; ++i) {
      double ax = 0.0;
      for (std::size_t j = 0; j < n; ++j) ax += k.A[i * n + j] * x[j];
      double noise = 0.0;
      for (std::size_t c = 0; c < k.d; ++c) {
        const double* Cc = k.C.data() + c * n * n + i * n;
        double cx = 0.0;
        for (std::size_t j = 0; j < n; ++j) cx += Cc[j] * x[j];
        noise += cx * z[c];
      }
      next[i] = x[i] + (ax + bu[i]) * k.dt + noise;
    }
    x.swap(next);
  }
  return state_cost * k.dt + k.control_cost;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed ^ mix64(stream + kGolden))) {}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

void validate_config(const SimulationConfig& cfg) {
  if (cfg.paths < 1) throw ConfigError("simulate: paths must be at least 1");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("simulate: dt must be positive");
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
    throw ConfigError("simulate: horizon must be positive");
  if (cfg.dt > cfg.horizon) throw ConfigError("simulate: dt exceeds the horizon");
  if (cfg.antithetic && cfg.paths % 2 != 0)
    throw ConfigError("simulate: antithetic sampling needs an even number of paths");
  if (!(cfg.overflow_factor > 1.0)) throw ConfigError("simulate: overflow factor must exceed 1");
}

CostEstimate simulate_paths(const SystemModel& sys, const CostModel& cost, const ControlSignal& u,
                            const InitialState& init, const SimulationConfig& cfg) {
  validate_config(cfg);
  const auto n = sys.n();
  if (cost.G().rows() != n || cost.Gamma().rows() != sys.m())
    throw DimensionError("simulate: cost weights do not match the system");
  if (init.n() != n) throw DimensionError("simulate: initial state has the wrong dimension");
  if (u.dim() != sys.m()) throw DimensionError("simulate: control has the wrong dimension");

  CostEstimate est;
  est.paths = cfg.paths;
  est.dt = cfg.dt;

  // Discrete second moments evolve by I + dt·L + dt²(A⊗A) under Euler–Maruyama.
  const auto cert = check_stability(sys);
  if (cert.ms_abscissa >= 0.0) {
    est.warnings.push_back("system is not mean-square stable; costs grow with the horizon");
  } else if (n <= 16) {
    const MatrixXd L = second_moment_generator(sys);
    const MatrixXd step = MatrixXd::Identity(L.rows(), L.cols()) + cfg.dt * L +
                          cfg.dt * cfg.dt * kron(sys.A(), sys.A());
    const double radius = step.eigenvalues().cwiseAbs().maxCoeff();
    if (radius >= 1.0) {
      est.warnings.push_back("dt too large: the discretized second moments are not contracting");
    }
  }

  PathKernel k;
  k.n = static_cast<std::size_t>(n);
  k.d = sys.d();
  k.steps = step_count(cfg);
  k.dt = cfg.dt;
  k.sqrt_dt = std::sqrt(cfg.dt);
  k.A.resize(k.n * k.n);
  copy_row_major(sys.A(), k.A.data());
  k.G.resize(k.n * k.n);
  copy_row_major(cost.G(), k.G.data());
  k.C.resize(k.d * k.n * k.n);
  for (std::size_t j = 0; j < k.d; ++j) copy_row_major(sys.noise()[j], k.C.data() + j * k.n * k.n);

  k.drift.assign(k.steps * k.n, 0.0);
  if (!u.is_zero()) {
    const auto values = u.sample_grid(cfg.dt, k.steps);
    double control = 0.0;
    for (std::size_t s = 0; s < k.steps; ++s) {
      const VectorXd bu = sys.b() * values[s];
      for (std::size_t i = 0; i < k.n; ++i) k.drift[s * k.n + i] = bu(static_cast<Eigen::Index>(i));
      control += values[s].dot(cost.Gamma() * values[s]);
    }
    k.control_cost = control * cfg.dt;
  }

  k.mean = init.mean();
  double scale = init.mean().norm();
  if (!init.is_deterministic()) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(init.covariance());
    const VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    k.factor = eig.eigenvectors() * root.asDiagonal();
    scale = std::max(scale, std::sqrt(init.covariance().trace()));
  }
  k.guard = cfg.overflow_factor * std::max(scale, 1.0);

  std::vector<double> costs(cfg.paths);
  const unsigned workers =
      static_cast<unsigned>(std::clamp<std::size_t>(cfg.workers == 0 ? 1 : cfg.workers, 1, cfg.paths));
  std::mutex fail_mutex;
  std::size_t first_failure = cfg.paths;

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(k.n), next(k.n), z(k.d);
    for (std::size_t p = begin; p < end; ++p) {
      const std::uint64_t stream = cfg.antithetic ? p / 2 : p;
      const double sign = (cfg.antithetic && p % 2 == 1) ? -1.0 : 1.0;
      costs[p] = run_path(k, cfg.seed, stream, sign, x, next, z);
      if (std::isnan(costs[p])) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        first_failure = std::min(first_failure, p);
        return;
      }
    }
  };

  if (workers == 1) {
    work(0, cfg.paths);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back(work, cfg.paths * w / workers, cfg.paths * (w + 1) / workers);
    }
    for (auto& t : pool) t.join();
  }
  if (first_failure < cfg.paths) {
    throw OverflowError("simulate: path " + std::to_string(first_failure) +
                        " exceeded the norm guard; dt is too large for this system");
  }

  // Antithetic pairs are one sample each for the error estimate.
  std::vector<double> samples;
  if (cfg.antithetic) {
    samples.resize(cfg.paths / 2);
    for (std::size_t i = 0; i < samples.size(); ++i)
      samples[i] = 0.5 * (costs[2 * i] + costs[2 * i + 1]);
  } else {
    samples = costs;
  }
  const std::size_t count = samples.size();
  const double mean = pairwise_sum(samples.data(), count) / static_cast<double>(count);
  est.mean_cost = mean;
  if (count > 1) {
    std::vector<double> dev(count);
    for (std::size_t i = 0; i < count; ++i) dev[i] = (samples[i] - mean) * (samples[i] - mean);
    const double var = pairwise_sum(dev.data(), count) / static_cast<double>(count - 1);
    est.std_error = std::sqrt(var / static_cast<double>(count));
  }
  if (cfg.keep_path_costs) est.path_costs = std::move(costs);
  return est;
}

void write_path_costs_csv(const std::filesystem::path& path, const std::vector<double>& costs) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "path_index,cost\n";
  for (std::size_t i = 0; i < costs.size(); ++i) out << i << ',' << costs[i] << '\n';
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace stochlq
