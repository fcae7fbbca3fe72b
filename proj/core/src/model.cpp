#include "stochlq/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "stochlq/errors.hpp"

namespace stochlq {

namespace {

std::string shape(const MatrixXd& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

void require_finite(const Eigen::Ref<const MatrixXd>& M, const char* name) {
  if (!M.allFinite()) throw InvariantError(std::string(name) + " has non-finite entries");
}

}  // namespace

SystemModel::SystemModel(MatrixXd A, MatrixXd b, std::vector<MatrixXd> noise)
    : A_(std::move(A)), b_(std::move(b)), noise_(std::move(noise)) {
  if (A_.rows() < 1 || A_.rows() != A_.cols()) {
    throw DimensionError("A must be square with n >= 1, got " + shape(A_));
  }
  if (b_.rows() != A_.rows() || b_.cols() < 1) {
    throw DimensionError("b must be n x m with m >= 1 (n = " + std::to_string(A_.rows()) +
                         "), got " + shape(b_));
  }
  if (noise_.empty()) throw DimensionError("at least one noise matrix C_j is required");
  for (std::size_t j = 0; j < noise_.size(); ++j) {
    if (noise_[j].rows() != A_.rows() || noise_[j].cols() != A_.cols()) {
      throw DimensionError("C[" + std::to_string(j) + "] must be " + shape(A_) + ", got " +
                           shape(noise_[j]));
    }
    require_finite(noise_[j], "C");
  }
  require_finite(A_, "A");
  require_finite(b_, "b");
}

MatrixXd validate_symmetric(const Eigen::Ref<const MatrixXd>& M, double tol) {
  if (M.rows() != M.cols()) throw DimensionError("matrix must be square, got " + shape(M));
  const double asym = norm_inf(M - M.transpose());
  if (!(asym <= tol * (1.0 + norm_inf(M)))) {
    throw InvariantError("matrix is not symmetric: ||M - M^T||_inf = " + std::to_string(asym));
  }
  return symmetrize(M);
}

CostModel::CostModel(const MatrixXd& G, const MatrixXd& Gamma, double tol) {
  require_finite(G, "G");
  require_finite(Gamma, "Gamma");
  if (G.rows() < 1) throw DimensionError("G must be non-empty");
  if (Gamma.rows() < 1) throw DimensionError("Gamma must be non-empty");
  G_ = validate_symmetric(G, tol);
  Gamma_ = validate_symmetric(Gamma, tol);
}

InitialState InitialState::deterministic(VectorXd mean) {
  if (mean.size() < 1) throw DimensionError("initial mean must be non-empty");
  require_finite(mean, "mean");
  InitialState s;
  s.second_moment_ = mean * mean.transpose();
  s.mean_ = std::move(mean);
  s.deterministic_ = true;
  return s;
}

InitialState::InitialState(VectorXd mean, const MatrixXd& second_moment,
                           std::optional<bool> deterministic)
    : mean_(std::move(mean)) {
  if (mean_.size() < 1) throw DimensionError("initial mean must be non-empty");
  if (second_moment.rows() != mean_.size() || second_moment.cols() != mean_.size()) {
    throw DimensionError("second_moment must be n x n with n = " + std::to_string(mean_.size()) +
                         ", got " + shape(second_moment));
  }
  require_finite(mean_, "mean");
  require_finite(second_moment, "second_moment");
  const MatrixXd S = validate_symmetric(second_moment, kSymmetryTolerance);
  const MatrixXd outer = mean_ * mean_.transpose();
  const MatrixXd cov = S - outer;
  const double scale = std::max(1.0, norm_inf(S));
  const double lmin = min_eigenvalue(cov);
  if (lmin < -kCovarianceTolerance * scale) {
    throw InvariantError("initial covariance second_moment - mean*mean^T is not PSD (min eigenvalue " +
                         std::to_string(lmin) + ")");
  }
  const bool zero_cov = norm_inf(cov) <= kSymmetryTolerance * scale;
  if (deterministic.value_or(false) && !zero_cov) {
    throw InvariantError("deterministic initial state requires second_moment = mean*mean^T");
  }
  deterministic_ = deterministic.value_or(zero_cov);
  second_moment_ = deterministic_ ? outer : S;
}

MatrixXd InitialState::covariance() const { return second_moment_ - mean_ * mean_.transpose(); }

void Problem::validate() const {
  const auto n = system.n();
  if (cost.G().rows() != n) {
    throw DimensionError("G must be " + std::to_string(n) + "x" + std::to_string(n) + ", got " +
                         shape(cost.G()));
  }
  if (cost.Gamma().rows() != system.m()) {
    throw DimensionError("Gamma must be m x m with m = " + std::to_string(system.m()) + ", got " +
                         shape(cost.Gamma()));
  }
  if (init.n() != n) {
    throw DimensionError("mean must have length " + std::to_string(n) + ", got " +
                         std::to_string(init.n()));
  }
}

MatrixXd matrix_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array() || j.empty()) {
    throw ParseError(std::string(name) + ": expected a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  MatrixXd M;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.empty()) {
      throw ParseError(std::string(name) + ": row " + std::to_string(i) + " is not a non-empty array");
    }
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      M.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw DimensionError(std::string(name) + ": ragged rows");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw ParseError(std::string(name) + ": non-numeric entry");
      M(i, k) = v.get<double>();
    }
  }
  return M;
}

VectorXd vector_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array() || j.empty()) throw ParseError(std::string(name) + ": expected a non-empty array");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(std::string(name) + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

nlohmann::json matrix_to_json(const Eigen::Ref<const MatrixXd>& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Eigen::Ref<const VectorXd>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Problem parse_problem(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("problem file must be a JSON object");
  for (const char* key : {"A", "b", "C", "G", "Gamma", "mean"}) {
    if (!doc.contains(key)) throw ParseError(std::string("missing required key '") + key + "'");
  }
  const auto& Cs = doc.at("C");
  if (!Cs.is_array() || Cs.empty()) throw ParseError("C: expected a non-empty array of matrices");
  std::vector<MatrixXd> noise;
  for (const auto& c : Cs) noise.push_back(matrix_from_json(c, "C"));

  SystemModel system(matrix_from_json(doc.at("A"), "A"), matrix_from_json(doc.at("b"), "b"),
                     std::move(noise));
  CostModel cost(matrix_from_json(doc.at("G"), "G"), matrix_from_json(doc.at("Gamma"), "Gamma"));

  VectorXd mean = vector_from_json(doc.at("mean"), "mean");
  std::optional<bool> deterministic;
  if (doc.contains("deterministic")) {
    if (!doc.at("deterministic").is_boolean()) throw ParseError("deterministic: expected a boolean");
    deterministic = doc.at("deterministic").get<bool>();
  }
  auto init = doc.contains("second_moment")
                  ? InitialState(std::move(mean), matrix_from_json(doc.at("second_moment"), "second_moment"),
                                 deterministic)
                  : InitialState::deterministic(std::move(mean));
  if (!doc.contains("second_moment") && deterministic == false) {
    throw ParseError("deterministic=false requires an explicit second_moment");
  }

  Problem p{std::move(system), std::move(cost), std::move(init)};
  p.validate();
  return p;
}

Problem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed JSON in " + path.string() + ": " + e.what());
  }
  try {
    return parse_problem(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid problem document: ") + e.what());
  }
}

nlohmann::json problem_to_json(const Problem& problem) {
  nlohmann::json C = nlohmann::json::array();
  for (const auto& c : problem.system.noise()) C.push_back(matrix_to_json(c));
  return {
      {"A", matrix_to_json(problem.system.A())},
      {"b", matrix_to_json(problem.system.b())},
      {"C", std::move(C)},
      {"G", matrix_to_json(problem.cost.G())},
      {"Gamma", matrix_to_json(problem.cost.Gamma())},
      {"mean", vector_to_json(problem.init.mean())},
      {"second_moment", matrix_to_json(problem.init.second_moment())},
      {"deterministic", problem.init.is_deterministic()},
  };
}

void save_problem(const Problem& problem, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write problem file " + path.string());
  out << problem_to_json(problem).dump(2) << '\n';
}

}  // namespace stochlq
