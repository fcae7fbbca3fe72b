#pragma once

#include <cstddef>

#include "stochlq/lyapunov.hpp"
#include "stochlq/model.hpp"

namespace stochlq {

/// g(λ) = (iλI − A)⁻¹ for real λ. Defined for all λ when A is Hurwitz.
class TransferFunction {
 public:
  explicit TransferFunction(MatrixXd A) : A_(std::move(A)) {}

  MatrixXcd operator()(double lambda) const;
  /// g(λ)·rhs without forming the inverse.
  MatrixXcd apply(double lambda, const Eigen::Ref<const MatrixXd>& rhs) const;

  const MatrixXd& A() const { return A_; }

 private:
  MatrixXcd resolvent_matrix(double lambda) const;

  MatrixXd A_;
};

/// The noise operator T(W) = (1/2π)∫ Σ_j C_jᵀ g(−λ)ᵀ W g(λ) C_j dλ,
/// evaluated through Parseval as Σ_j C_jᵀ X C_j with AᵀX + XA = −W.
/// Factorizes A once; reuse it when T is applied repeatedly.
class NoiseOperator {
 public:
  explicit NoiseOperator(const SystemModel& sys);

  MatrixXd operator()(const Eigen::Ref<const MatrixXd>& W) const;
  /// Gramian of W: X with AᵀX + XA = −W.
  MatrixXd gramian(const Eigen::Ref<const MatrixXd>& W) const { return lyap_.solve(W); }
  /// Σ_j C_jᵀ X C_j.
  MatrixXd noise_sandwich(const Eigen::Ref<const MatrixXd>& X) const;

  const SystemModel& system() const { return sys_; }

 private:
  SystemModel sys_;
  LyapunovSolver lyap_;
};

MatrixXd apply_T(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& W);

struct QuadratureOptions {
  std::size_t max_evaluations = 400000;
};

/// Independent oracle for apply_T: adaptive Gauss–Kronrod quadrature of the
/// frequency integral over [0, Λ] plus the analytic tail bound
/// ‖integrand‖ ≤ Σ‖C_j‖²‖W‖/(λ − ‖A‖)². Λ grows until the bound is below
/// a quarter of the requested accuracy. rel_tol must lie in (1e-12, 1e-2).
/// Throws ConvergenceError when the evaluation budget is exhausted.
MatrixXd quadrature_T(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& W, double rel_tol,
                      const QuadratureOptions& options = {});

enum class ThetaMethod { Direct, FixedPoint };

struct ThetaOptions {
  ThetaMethod method = ThetaMethod::Direct;
  double tol = 1e-10;
  int max_iterations = 10000;
};

struct ThetaSolution {
  MatrixXd Theta;               // Θ = G + T(Θ)
  MatrixXd X;                   // AᵀX + XA = −Θ
  double residual_eq4 = 0.0;    // ‖Θ − G − T(Θ)‖_∞
  double residual_gramian = 0.0;  // ‖AᵀX + XA + Σ C_jᵀXC_j + G‖_∞
  ThetaMethod method = ThetaMethod::Direct;
  int iterations = 0;           // fixed-point sweeps (0 for Direct)
};

/// Solves Θ = G + T(Θ). Requires a mean-square stable system.
/// Direct: symmetric-coordinate linear system (I − T)θ = g of size n(n+1)/2;
/// throws SingularError if it is numerically singular.
/// FixedPoint: Θ_{k+1} = G + T(Θ_k) from Θ_0 = G until the update is below
/// tol; throws ConvergenceError on the iteration cap or when the update
/// norm grows tenfold over its running minimum.
ThetaSolution solve_theta(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& G,
                          const ThetaOptions& options = {});

const char* to_string(ThetaMethod m);

}  // namespace stochlq
