#include "app.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include <openssl/evp.h>

#include "stochlq/errors.hpp"
#include "stochlq/evaluate.hpp"
#include "stochlq/lqr.hpp"
#include "stochlq/montecarlo.hpp"
#include "stochlq/serialize.hpp"
#include "stochlq/stability.hpp"
#include "stochlq/theta.hpp"

namespace stochlq::app {
namespace {

// Raised inside a stage; carries the stage name out to the error report.
struct StageFailure {
  std::string stage;
  std::string kind;
  std::string message;
  int exit_code;
};

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const DimensionError*>(&e)) return "DimensionError";
  if (dynamic_cast<const InvariantError*>(&e)) return "InvariantError";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "ConvergenceError";
  if (dynamic_cast<const SingularError*>(&e)) return "SingularError";
  if (dynamic_cast<const RiccatiError*>(&e)) return "RiccatiError";
  if (dynamic_cast<const IntegratorError*>(&e)) return "IntegratorError";
  if (dynamic_cast<const TailError*>(&e)) return "TailError";
  if (dynamic_cast<const OverflowError*>(&e)) return "OverflowError";
  if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
  if (dynamic_cast<const HorizonError*>(&e)) return "HorizonError";
  if (dynamic_cast<const InputError*>(&e)) return "InputError";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const GateError*>(&e)) return "GateError";
  return "Error";
}

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const RiccatiError& e) {
    throw StageFailure{name, error_kind(e), e.what(), kExitRiccati};
  } catch (const std::exception& e) {
    throw StageFailure{name, error_kind(e), e.what(), kExitError};
  }
}

int verdict_exit(FrequencyVerdict v) {
  switch (v) {
    case FrequencyVerdict::StrictlyPositive: return kExitOk;
    case FrequencyVerdict::NonnegativeOnly: return kExitNonnegativeOnly;
    case FrequencyVerdict::Fails: return kExitFails;
  }
  return kExitError;
}

std::string line(const char* format, double value) {
  char buf[128];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

class Runner {
 public:
  explicit Runner(const RunOptions& o) : opt_(o) {
    report_["tool_version"] = kToolVersion;
    report_["command"] = to_string(o.command);
  }

  RunResult execute() {
    RunResult result;
    try {
      result.exit_code = dispatch();
    } catch (const StageFailure& f) {
      report_["error"] = {{"stage", f.stage}, {"kind", f.kind}, {"message", f.message}};
      summary_ << "error in stage " << f.stage << ": " << f.kind << ": " << f.message << '\n';
      result.exit_code = f.exit_code;
    }
    try {
      std::filesystem::create_directories(opt_.out);
      write_json(report_, opt_.out / "report.json");
    } catch (const std::exception& e) {
      summary_ << "cannot write report: " << e.what() << '\n';
      result.exit_code = kExitError;
    }
    result.report = report_;
    result.summary = summary_.str();
    return result;
  }

 private:
  int dispatch() {
    stage("output", [&] { std::filesystem::create_directories(opt_.out); });
    report_["input_digest"] = stage("load", [&] { return file_digest(opt_.problem); });
    problem_ = stage("load", [&] { return load_problem(opt_.problem); });
    const auto& sys = problem_->system;

    const auto cert = stage("stability", [&] { return check_stability(sys); });
    report_["stability"] = to_json(cert);
    summary_ << "stability: " << to_string(cert.verdict) << line(" (ms_abscissa %.6g)", cert.ms_abscissa) << '\n';
    if (!cert.stable()) {
      report_["error"] = {{"stage", "stability"}, {"kind", "Unstable"},
                          {"message", "the system is not mean-square exponentially stable"}};
      return kExitUnstable;
    }

    theta_ = stage("theta", [&] {
      ThetaOptions to;
      to.tol = std::min(opt_.tol, 1e-10);
      return solve_theta(sys, problem_->cost.G(), to);
    });
    report_["theta"] = to_json(*theta_);
    summary_ << line("theta: residuals %.3g", theta_->residual_eq4) << line(" / %.3g", theta_->residual_gramian) << '\n';

    frequency_ = stage("frequency", [&] {
      FrequencyOptions fo;
      fo.tol = opt_.tol;
      return check_frequency_condition(sys, *theta_, problem_->cost.Gamma(), fo);
    });
    report_["frequency"] = to_json(*frequency_);
    summary_ << "frequency: " << to_string(frequency_->verdict) << line(" (delta_hat %.6g)", frequency_->delta_hat)
             << '\n';

    switch (opt_.command) {
      case Command::Check: return verdict_exit(frequency_->verdict);
      case Command::Solve: return solve();
      case Command::Evaluate: return evaluate();
      case Command::Simulate: return simulate();
    }
    return kExitError;
  }

  // Computes the optimal law behind the frequency gate. Returns a nonzero
  // exit code when the gate refuses.
  int compute_law() {
    LqrOptions lo;
    lo.regularization = opt_.regularize;
    try {
      law_ = solve_optimal_law(problem_->system, *theta_, problem_->cost.Gamma(), *frequency_, lo);
    } catch (const GateError& e) {
      report_["error"] = {{"stage", "lqr"}, {"kind", "GateError"}, {"message", e.what()}};
      summary_ << "refused: " << e.what() << '\n';
      return verdict_exit(frequency_->verdict);
    } catch (const RiccatiError& e) {
      throw StageFailure{"lqr", "RiccatiError", e.what(), kExitRiccati};
    } catch (const std::exception& e) {
      throw StageFailure{"lqr", error_kind(e), e.what(), kExitError};
    }
    report_["law"] = to_json(*law_);
    summary_ << line("law: riccati residual %.3g", law_->riccati_residual)
             << line(", closed-loop abscissa %.6g", law_->closed_loop_abscissa) << '\n';
    return kExitOk;
  }

  int solve() {
    if (const int code = compute_law(); code != kExitOk) return code;
    stage("output", [&] { save_feedback_law(*law_, opt_.out / "law.json"); });
    return kExitOk;
  }

  // Control for evaluate/simulate: --control file, --law file, --optimal, else u = 0.
  std::optional<int> resolve_control() {
    const auto m = problem_->system.m();
    if (opt_.control) {
      control_ = stage("control", [&] { return load_sampled_control(*opt_.control); });
      if (control_->dim() != m) {
        throw StageFailure{"control", "DimensionError", "control dimension does not match b", kExitError};
      }
      report_["control"] = "file";
      return std::nullopt;
    }
    if (opt_.law) {
      law_ = stage("control", [&] { return load_feedback_law(*opt_.law); });
      if (law_->h.rows() != problem_->system.n() || law_->h.cols() != m) {
        throw StageFailure{"control", "DimensionError", "law does not match the problem dimensions", kExitError};
      }
      report_["law"] = to_json(*law_);
      report_["control"] = "law";
    } else if (opt_.optimal) {
      if (const int code = compute_law(); code != kExitOk) return code;
      report_["control"] = "optimal";
    } else {
      control_ = ControlSignal::zero(m);
      report_["control"] = "zero";
      return std::nullopt;
    }
    control_ = stage("control", [&] { return synthesize_control(*law_, problem_->init).feedback; });
    return std::nullopt;
  }

  int evaluate() {
    if (const auto code = resolve_control()) return *code;
    const auto& p = *problem_;
    CostOptions co;
    co.tol = opt_.tol;
    if (opt_.horizon) co.horizon = *opt_.horizon;
    const auto costs = stage("evaluate", [&] { return cost_phi(p.system, p.cost, *control_, p.init, co); });
    const auto [rho, rho1] = stage("evaluate", [&] { return rho_and_rho1(p.system, p.cost, *theta_, p.init); });
    auto cj = to_json(costs);
    cj["rho_gramian"] = real_to_json(rho);
    cj["rho1"] = real_to_json(rho1);
    report_["costs"] = cj;
    summary_ << line("cost: total %.10g", costs.total) << line(" = quadratic %.6g", costs.quadratic)
             << line(" + cross %.6g", costs.cross) << line(" + rho %.6g", costs.constant_rho) << '\n';

    stage("output", [&] {
      MomentOptions mo;
      mo.tol = std::min(opt_.tol, 1e-10);
      const int samples = 200;
      for (int k = 0; k <= samples; ++k) mo.output_times.push_back(costs.horizon * k / samples);
      write_moments_csv(opt_.out / "moments.csv", integrate_moments(p.system, *control_, p.init, costs.horizon, mo));
    });
    return kExitOk;
  }

  int simulate() {
    if (const auto code = resolve_control()) return *code;
    const auto& p = *problem_;
    SimulationConfig cfg;
    cfg.paths = opt_.paths;
    cfg.dt = opt_.dt;
    cfg.seed = opt_.seed;
    cfg.workers = opt_.workers;
    cfg.antithetic = opt_.antithetic;
    cfg.keep_path_costs = true;
    // Default horizon: the second moments have decayed by e^{-20}.
    cfg.horizon = opt_.horizon ? *opt_.horizon : 20.0 / std::abs(check_stability(p.system).ms_abscissa);
    const auto est = stage("montecarlo", [&] { return simulate_paths(p.system, p.cost, *control_, p.init, cfg); });
    auto mj = to_json(est);
    mj["horizon"] = real_to_json(cfg.horizon);
    mj["seed"] = cfg.seed;
    report_["montecarlo"] = mj;
    summary_ << line("montecarlo: mean %.8g", est.mean_cost) << line(" +- %.3g", est.std_error) << " ("
             << est.paths << " paths)\n";
    for (const auto& w : est.warnings) summary_ << "warning: " << w << '\n';
    stage("output", [&] { write_path_costs_csv(opt_.out / "paths.csv", est.path_costs); });
    return kExitOk;
  }

  const RunOptions& opt_;
  nlohmann::json report_ = nlohmann::json::object();
  std::ostringstream summary_;
  std::optional<Problem> problem_;
  std::optional<ThetaSolution> theta_;
  std::optional<FrequencyReport> frequency_;
  std::optional<FeedbackLaw> law_;
  std::optional<ControlSignal> control_;
};

}  // namespace

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open problem file " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  std::string hex = "sha256:";
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

const char* to_string(Command c) {
  switch (c) {
    case Command::Check: return "check";
    case Command::Solve: return "solve";
    case Command::Evaluate: return "evaluate";
    case Command::Simulate: return "simulate";
  }
  return "?";
}

RunResult run(const RunOptions& options) { return Runner(options).execute(); }

}  // namespace stochlq::app
