#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace stochlq::app {

inline constexpr const char* kToolVersion = "stochlq 0.3.0";

enum class Command { Check, Solve, Evaluate, Simulate };

// Exit codes. The verdict codes double as refusal codes for gated commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNonnegativeOnly = 2;
inline constexpr int kExitFails = 3;
inline constexpr int kExitUnstable = 4;
inline constexpr int kExitRiccati = 5;

struct RunOptions {
  Command command = Command::Check;
  std::filesystem::path problem;
  std::filesystem::path out = ".";
  double tol = 1e-9;
  std::optional<double> horizon;
  double dt = 1e-3;
  std::size_t paths = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool antithetic = false;
  std::optional<std::filesystem::path> law;
  std::optional<std::filesystem::path> control;
  bool optimal = false;
  std::optional<double> regularize;
};

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::json report;
  std::string summary;  // human-readable lines for stdout
};

/// Runs one command and writes report.json (and the command's other
/// outputs) into options.out. Never throws for problem-level failures:
/// those become a structured error report naming the failing stage.
RunResult run(const RunOptions& options);

/// "sha256:<hex>" of the file contents.
std::string file_digest(const std::filesystem::path& path);

const char* to_string(Command c);

}  // namespace stochlq::app
