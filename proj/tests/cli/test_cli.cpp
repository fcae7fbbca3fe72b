#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "app.hpp"
#include "stochlq/serialize.hpp"

using namespace stochlq;
using app::Command;

namespace {

const std::filesystem::path kData = STOCHLQ_TEST_DATA;

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("stochlq_cli_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

app::RunOptions options(Command c, const char* file, const std::string& out) {
  app::RunOptions o;
  o.command = c;
  o.problem = kData / file;
  o.out = fresh_dir(out);
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("check exit codes follow the verdicts") {
  auto r = app::run(options(Command::Check, "scalar.json", "check0"));
  CHECK(r.exit_code == 0);
  CHECK(r.report.at("frequency").at("delta_hat").get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::filesystem::exists(kData.parent_path() / "data"));

  CHECK(app::run(options(Command::Check, "scalar_boundary.json", "check2")).exit_code == 2);
  CHECK(app::run(options(Command::Check, "scalar_fails.json", "check3")).exit_code == 3);
  const auto unstable = app::run(options(Command::Check, "scalar_unstable.json", "check4"));
  CHECK(unstable.exit_code == 4);
  CHECK(unstable.report.at("stability").at("verdict") == "Unstable");
}

TEST_CASE("load failures produce a structured error report") {
  auto o = options(Command::Check, "missing.json", "missing");
  const auto r = app::run(o);
  CHECK(r.exit_code == 1);
  CHECK(r.report.at("error").at("stage") == "load");
  const auto written = nlohmann::json::parse(slurp(o.out / "report.json"));
  CHECK(written.at("error").at("kind") == "ParseError");
}

TEST_CASE("solve writes the scalar law") {
  auto o = options(Command::Solve, "scalar.json", "solve");
  const auto r = app::run(o);
  REQUIRE(r.exit_code == 0);
  const auto law = load_feedback_law(o.out / "law.json");
  CHECK(law.h(0, 0) == doctest::Approx(-(std::sqrt(3.0) - 1.0)).epsilon(1e-12));

  auto z = options(Command::Solve, "scalar_zero_weight.json", "solve_zero");
  REQUIRE(app::run(z).exit_code == 0);
  CHECK(std::abs(load_feedback_law(z.out / "law.json").h(0, 0)) <= 1e-14);
}

TEST_CASE("solve refuses behind the gate") {
  const auto r = app::run(options(Command::Solve, "scalar_boundary.json", "refuse"));
  CHECK(r.exit_code == 2);
  CHECK(r.report.at("error").at("kind") == "GateError");
  CHECK(app::run(options(Command::Solve, "scalar_unstable.json", "refuse4")).exit_code == 4);

  auto reg = options(Command::Solve, "scalar_boundary.json", "regularized");
  reg.regularize = 1e-6;
  CHECK(app::run(reg).exit_code == 0);
}

TEST_CASE("law file round-trips with matching residuals") {
  auto o = options(Command::Solve, "two_state.json", "two_state");
  const auto r = app::run(o);
  REQUIRE(r.exit_code == 0);
  const auto law = load_feedback_law(o.out / "law.json");
  const auto problem = load_problem(kData / "two_state.json");
  const auto theta = solve_theta(problem.system, problem.cost.G());
  CHECK(riccati_residual(problem.system, theta.Theta, problem.cost.Gamma(), law.P) ==
        doctest::Approx(law.riccati_residual).epsilon(1e-6).scale(1e-12));
  CHECK(law.P == matrix_from_json(r.report.at("law").at("P"), "P"));
}

TEST_CASE("evaluate") {
  auto zero = options(Command::Evaluate, "scalar.json", "eval_zero");
  const auto r0 = app::run(zero);
  REQUIRE(r0.exit_code == 0);
  CHECK(r0.report.at("costs").at("total").get<double>() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::filesystem::exists(zero.out / "moments.csv"));

  auto opt = options(Command::Evaluate, "scalar.json", "eval_opt");
  opt.optimal = true;
  const auto r1 = app::run(opt);
  REQUIRE(r1.exit_code == 0);
  CHECK(r1.report.at("costs").at("total").get<double>() < 1.0);

  auto none = options(Command::Evaluate, "scalar_zero_init.json", "eval_none");
  CHECK(app::run(none).report.at("costs").at("total").get<double>() == 0.0);

  auto file = options(Command::Evaluate, "scalar.json", "eval_file");
  file.control = kData / "scalar_control.json";
  const auto rf = app::run(file);
  REQUIRE(rf.exit_code == 0);
  CHECK(rf.report.at("control") == "file");
}

TEST_CASE("evaluate with a stored law matches --optimal") {
  auto s = options(Command::Solve, "scalar.json", "law_src");
  REQUIRE(app::run(s).exit_code == 0);
  auto e = options(Command::Evaluate, "scalar.json", "law_eval");
  e.law = s.out / "law.json";
  auto o = options(Command::Evaluate, "scalar.json", "law_opt");
  o.optimal = true;
  CHECK(app::run(e).report.at("costs").at("total") == app::run(o).report.at("costs").at("total"));
}

TEST_CASE("simulate writes per-path costs") {
  auto o = options(Command::Simulate, "scalar.json", "simulate");
  o.paths = 200;
  o.dt = 1e-2;
  o.horizon = 5.0;
  o.seed = 3;
  const auto r = app::run(o);
  REQUIRE(r.exit_code == 0);
  CHECK(r.report.at("montecarlo").at("paths") == 200);
  std::ifstream in(o.out / "paths.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "path_index,cost");

  o.paths = 0;
  o.out = fresh_dir("simulate_bad");
  const auto bad = app::run(o);
  CHECK(bad.exit_code == 1);
  CHECK(bad.report.at("error").at("stage") == "montecarlo");
  CHECK(bad.report.at("error").at("kind") == "ConfigError");
}

TEST_CASE("reports are byte-identical across runs") {
  for (auto c : {Command::Check, Command::Solve, Command::Evaluate, Command::Simulate}) {
    auto a = options(c, "two_state.json", "repro_a");
    auto b = options(c, "two_state.json", "repro_b");
    a.paths = b.paths = 100;
    a.dt = b.dt = 1e-2;
    a.workers = 1;
    b.workers = 4;
    app::run(a);
    app::run(b);
    CHECK(slurp(a.out / "report.json") == slurp(b.out / "report.json"));
  }
}

TEST_CASE("input digest identifies the problem file") {
  const auto r = app::run(options(Command::Check, "scalar.json", "digest"));
  const std::string d = r.report.at("input_digest");
  CHECK(d.rfind("sha256:", 0) == 0);
  CHECK(d.size() == 7 + 64);
  CHECK(d != app::file_digest(kData / "two_state.json"));
}
