#pragma once

#include <Eigen/Eigenvalues>

#include "stochlq/linalg.hpp"

namespace stochlq {

/// Solves FᵀX + XF = −Q for a fixed F (complex Schur form, Bartels–Stewart
/// back substitution). Factor once, solve for many right-hand sides.
class LyapunovSolver {
 public:
  /// Throws NumericalError if F has eigenvalues λ_i, λ_j with λ̄_i + λ_j ≈ 0
  /// (the Sylvester operator is singular to working precision).
  explicit LyapunovSolver(const Eigen::Ref<const MatrixXd>& F);

  /// Returns X with FᵀX + XF = −Q. One step of iterative refinement is
  /// applied; throws NumericalError if the residual still exceeds
  /// 1e-10·(1 + ‖Q‖_∞). X is exactly symmetric when Q is symmetric.
  MatrixXd solve(const Eigen::Ref<const MatrixXd>& Q) const;

  const MatrixXd& F() const { return F_; }

 private:
  MatrixXd solve_once(const Eigen::Ref<const MatrixXd>& Q) const;

  MatrixXd F_;
  MatrixXcd U_;
  MatrixXcd T_;
};

/// One-shot FᵀX + XF = −Q.
MatrixXd lyap_solve(const Eigen::Ref<const MatrixXd>& F, const Eigen::Ref<const MatrixXd>& Q);

/// ‖FᵀX + XF + Q‖_∞.
double lyap_residual(const Eigen::Ref<const MatrixXd>& F, const Eigen::Ref<const MatrixXd>& X,
                     const Eigen::Ref<const MatrixXd>& Q);

}  // namespace stochlq
