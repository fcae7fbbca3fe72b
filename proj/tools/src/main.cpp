#include <iostream>

#include <CLI11.hpp>

#include "app.hpp"

int main(int argc, char** argv) {
  using stochlq::app::Command;
  stochlq::app::RunOptions opt;
  std::string problem;
  std::string out = ".";
  std::string law, control;
  std::optional<double> horizon, regularize;

  CLI::App cli{"Stochastic LQ toolkit for linear systems with multiplicative noise"};
  cli.set_version_flag("--version", stochlq::app::kToolVersion);
  cli.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    Command command;
  };
  const Sub subs[] = {
      {"check", "stability, Theta and the frequency condition", Command::Check},
      {"solve", "compute the optimal feedback law (writes law.json)", Command::Solve},
      {"evaluate", "cost of a control through the moment equations", Command::Evaluate},
      {"simulate", "Monte Carlo estimate of the cost", Command::Simulate},
  };
  for (const auto& s : subs) {
    auto* sc = cli.add_subcommand(s.name, s.help);
    sc->add_option("problem", problem, "problem file (JSON)")->required()->check(CLI::ExistingFile);
    sc->add_option("--tol", opt.tol, "tolerance")->capture_default_str();
    sc->add_option("--out", out, "output directory")->capture_default_str();
    sc->add_option("--regularize", regularize, "accept a NonnegativeOnly verdict with Gamma + eps*I");
    if (s.command == Command::Evaluate || s.command == Command::Simulate) {
      sc->add_option("--horizon", horizon, "evaluation or simulation horizon");
      sc->add_option("--law", law, "feedback law file (law.json)")->check(CLI::ExistingFile);
      sc->add_option("--control", control, "sampled control file")->check(CLI::ExistingFile);
      sc->add_flag("--optimal", opt.optimal, "use the optimal control (recomputed unless --law is given)");
    }
    if (s.command == Command::Simulate) {
      sc->add_option("--dt", opt.dt, "Euler-Maruyama step")->capture_default_str();
      sc->add_option("--paths", opt.paths, "number of paths")->capture_default_str();
      sc->add_option("--seed", opt.seed, "random seed")->capture_default_str();
      sc->add_option("--workers", opt.workers, "worker threads (results do not depend on it)")->capture_default_str();
      sc->add_flag("--antithetic", opt.antithetic, "antithetic path pairs");
    }
    sc->callback([&opt, cmd = s.command] { opt.command = cmd; });
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : stochlq::app::kExitError;
  }

  opt.problem = problem;
  opt.out = out;
  opt.horizon = horizon;
  opt.regularize = regularize;
  if (!law.empty()) opt.law = law;
  if (!control.empty()) opt.control = control;

  const auto result = stochlq::app::run(opt);
  std::cout << result.summary;
  return result.exit_code;
}
