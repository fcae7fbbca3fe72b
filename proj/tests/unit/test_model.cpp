#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "stochlq/errors.hpp"
#include "stochlq/linalg.hpp"
#include "stochlq/model.hpp"

using namespace stochlq;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("stochlq_model_" + name + ".json");
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("scalar problem file loads") {
  const auto path = write_temp("scalar", R"({"A":[[-1]],"b":[[1]],"C":[[[1]]],"G":[[1]],"Gamma":[[1]],
                                              "mean":[1],"deterministic":true})");
  const Problem p = load_problem(path);
  CHECK(p.system.n() == 1);
  CHECK(p.system.m() == 1);
  CHECK(p.system.d() == 1);
  CHECK(p.init.is_deterministic());
  CHECK(p.init.second_moment()(0, 0) == 1.0);
}

TEST_CASE("shape mismatch between A and b") {
  const auto path = write_temp("shape", R"({"A":[[-1,0,0],[0,-1,0],[0,0,-1]],"b":[[1],[1]],"C":[[[0,0,0],[0,0,0],[0,0,0]]],
                                             "G":[[1,0,0],[0,1,0],[0,0,1]],"Gamma":[[1]],"mean":[1,1,1]})");
  CHECK_THROWS_AS(load_problem(path), DimensionError);
}

TEST_CASE("second moment below the mean outer product is rejected") {
  const auto path = write_temp("psd", R"({"A":[[-1]],"b":[[1]],"C":[[[1]]],"G":[[1]],"Gamma":[[1]],
                                           "mean":[1],"second_moment":[[0]]})");
  CHECK_THROWS_AS(load_problem(path), InvariantError);
}

TEST_CASE("malformed and incomplete files") {
  CHECK_THROWS_AS(load_problem(write_temp("broken", "{\"A\": [[-1]")), ParseError);
  CHECK_THROWS_AS(load_problem(write_temp("missing", R"({"A":[[-1]]})")), ParseError);
  CHECK_THROWS_AS(load_problem("/nonexistent/problem.json"), ParseError);
  CHECK_THROWS_AS(load_problem(write_temp("nondet", R"({"A":[[-1]],"b":[[1]],"C":[[[1]]],"G":[[1]],"Gamma":[[1]],
                                                        "mean":[1],"deterministic":false})")),
                  ParseError);
}

TEST_CASE("non-finite entries are rejected") {
  MatrixXd A = MatrixXd::Constant(1, 1, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(SystemModel(A, MatrixXd::Ones(1, 1), {MatrixXd::Zero(1, 1)}), InvariantError);
  CHECK_THROWS_AS(SystemModel(MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1), {}), DimensionError);
}

TEST_CASE("validate_symmetric") {
  const MatrixXd I = MatrixXd::Identity(2, 2);
  CHECK(validate_symmetric(I, 1e-12) == I);

  MatrixXd M(2, 2);
  M << 1, 1e-15, 0, 1;
  const MatrixXd S = validate_symmetric(M, 1e-12);
  CHECK(S(0, 1) == doctest::Approx(5e-16).epsilon(1e-12));
  CHECK(S(0, 1) == S(1, 0));

  MatrixXd K(2, 2);
  K << 0, 1, -1, 0;
  CHECK_THROWS_AS(validate_symmetric(K, 1e-12), InvariantError);
}

TEST_CASE("deterministic flag is inferred and enforced") {
  VectorXd mean(2);
  mean << 1, -2;
  const InitialState inferred(mean, mean * mean.transpose());
  CHECK(inferred.is_deterministic());
  CHECK(inferred.covariance().norm() == 0.0);

  const MatrixXd S = mean * mean.transpose() + MatrixXd::Identity(2, 2);
  const InitialState random(mean, S);
  CHECK_FALSE(random.is_deterministic());
  CHECK(min_eigenvalue(random.covariance()) == doctest::Approx(1.0));
}

TEST_CASE("problem round-trips through JSON") {
  MatrixXd A(2, 2), b(2, 1), C(2, 2), G(2, 2), Gamma(1, 1);
  A << -1, 0.3, 0, -2;
  b << 1, 0.5;
  C << 0.1, 0, 0.2, 0.3;
  G << 2, 0.1, 0.1, 1;
  Gamma << 0.7;
  VectorXd mean(2);
  mean << 0.25, -1.0 / 3.0;
  const MatrixXd S = mean * mean.transpose() + 0.1 * MatrixXd::Identity(2, 2);
  const Problem p{SystemModel(A, b, {C}), CostModel(G, Gamma), InitialState(mean, S)};
  const Problem q = parse_problem(problem_to_json(p));
  CHECK(q.system.A() == p.system.A());
  CHECK(q.system.noise()[0] == C);
  CHECK(q.cost.G() == p.cost.G());
  CHECK(q.init.mean() == mean);
  CHECK(q.init.second_moment() == p.init.second_moment());
  CHECK(q.init.is_deterministic() == p.init.is_deterministic());
}

TEST_CASE("symmetric coordinates") {
  MatrixXd S(3, 3);
  S << 1, 2, 3, 2, 4, 5, 3, 5, 6;
  const VectorXd v = sym_vec(S);
  REQUIRE(v.size() == 6);
  CHECK(v(0) == 1);
  CHECK(v(1) == 2);
  CHECK(v(3) == 4);
  CHECK(sym_unvec(v, 3) == S);
}
