#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "stochlq/linalg.hpp"

namespace stochlq {

/// Relative asymmetry tolerated (and removed) when G and Γ are ingested.
inline constexpr double kSymmetryTolerance = 1e-12;

/// Tolerance on the smallest eigenvalue of the initial covariance.
inline constexpr double kCovarianceTolerance = 1e-10;

/// Itô system dx = (Ax + bu)dt + Σ_j C_j x dw_j with d ≥ 1 independent
/// Wiener channels. Immutable once constructed.
class SystemModel {
 public:
  /// Throws DimensionError on inconsistent shapes and InvariantError on
  /// non-finite entries.
  SystemModel(MatrixXd A, MatrixXd b, std::vector<MatrixXd> noise);

  const MatrixXd& A() const { return A_; }
  const MatrixXd& b() const { return b_; }
  const std::vector<MatrixXd>& noise() const { return noise_; }

  Eigen::Index n() const { return A_.rows(); }
  Eigen::Index m() const { return b_.cols(); }
  std::size_t d() const { return noise_.size(); }

 private:
  MatrixXd A_;
  MatrixXd b_;
  std::vector<MatrixXd> noise_;
};

/// Quadratic weights of ∫ E xᵀGx + uᵀΓu dt. Neither weight needs to be
/// definite. Both are symmetrized on construction.
class CostModel {
 public:
  CostModel(const MatrixXd& G, const MatrixXd& Gamma, double tol = kSymmetryTolerance);

  const MatrixXd& G() const { return G_; }
  const MatrixXd& Gamma() const { return Gamma_; }

 private:
  MatrixXd G_;
  MatrixXd Gamma_;
};

/// The initial state enters every cost only through E a and E aaᵀ, so that is
/// all we keep.
class InitialState {
 public:
  /// a = mean almost surely.
  static InitialState deterministic(VectorXd mean);

  /// Throws InvariantError when the covariance second_moment − mean·meanᵀ is
  /// not PSD (to kCovarianceTolerance) or when `deterministic` is asserted
  /// but the covariance is nonzero. Leaving `deterministic` empty infers it.
  InitialState(VectorXd mean, const MatrixXd& second_moment,
               std::optional<bool> deterministic = std::nullopt);

  const VectorXd& mean() const { return mean_; }
  const MatrixXd& second_moment() const { return second_moment_; }
  bool is_deterministic() const { return deterministic_; }
  MatrixXd covariance() const;
  Eigen::Index n() const { return mean_.size(); }

 private:
  InitialState() = default;

  VectorXd mean_;
  MatrixXd second_moment_;
  bool deterministic_ = true;
};

struct Problem {
  SystemModel system;
  CostModel cost;
  InitialState init;

  /// Cross-object shape checks (cost and initial state against the system).
  void validate() const;
};

/// Returns (M + Mᵀ)/2 when ‖M − Mᵀ‖_∞ ≤ tol·(1 + ‖M‖_∞), else throws
/// InvariantError. DimensionError if M is not square.
MatrixXd validate_symmetric(const Eigen::Ref<const MatrixXd>& M, double tol);

Problem parse_problem(const nlohmann::json& doc);
Problem load_problem(const std::filesystem::path& path);

nlohmann::json problem_to_json(const Problem& problem);
void save_problem(const Problem& problem, const std::filesystem::path& path);

// JSON <-> Eigen helpers shared by the other file formats.
MatrixXd matrix_from_json(const nlohmann::json& j, const char* name);
VectorXd vector_from_json(const nlohmann::json& j, const char* name);
nlohmann::json matrix_to_json(const Eigen::Ref<const MatrixXd>& M);
nlohmann::json vector_to_json(const Eigen::Ref<const VectorXd>& v);

}  // namespace stochlq
