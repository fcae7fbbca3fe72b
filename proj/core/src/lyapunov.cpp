#include "stochlq/lyapunov.hpp"

#include <complex>
#include <limits>
#include <string>

#include "stochlq/errors.hpp"

namespace stochlq {

namespace {
constexpr double kResidualTolerance = 1e-10;
}

LyapunovSolver::LyapunovSolver(const Eigen::Ref<const MatrixXd>& F) : F_(F) {
  if (F_.rows() != F_.cols() || F_.rows() < 1) {
    throw DimensionError("LyapunovSolver: F must be square and non-empty");
  }
  Eigen::ComplexSchur<MatrixXcd> schur(F_.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) {
    throw NumericalError("LyapunovSolver: Schur factorization failed");
  }
  U_ = schur.matrixU();
  T_ = schur.matrixT();
  const double scale = std::max(1.0, norm_inf(F_));
  const auto n = F_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      if (std::abs(std::conj(T_(i, i)) + T_(j, j)) <=
          64.0 * std::numeric_limits<double>::epsilon() * scale) {
        throw NumericalError("LyapunovSolver: eigenvalues of F sum to zero; solution not unique");
      }
    }
  }
}

MatrixXd LyapunovSolver::solve_once(const Eigen::Ref<const MatrixXd>& Q) const {
  // With F = U T U*, the equation becomes T* Y + Y T = −U* Q U, X = U Y U*.
  const auto n = F_.rows();
  const MatrixXcd C = -(U_.adjoint() * Q.cast<std::complex<double>>() * U_);
  MatrixXcd Y(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      std::complex<double> acc = C(i, j);
      for (Eigen::Index k = 0; k < i; ++k) acc -= std::conj(T_(k, i)) * Y(k, j);
      for (Eigen::Index k = 0; k < j; ++k) acc -= Y(i, k) * T_(k, j);
      Y(i, j) = acc / (std::conj(T_(i, i)) + T_(j, j));
    }
  }
  return (U_ * Y * U_.adjoint()).real();
}

MatrixXd LyapunovSolver::solve(const Eigen::Ref<const MatrixXd>& Q) const {
  if (Q.rows() != F_.rows() || Q.cols() != F_.cols()) {
    throw DimensionError("LyapunovSolver: Q must match F");
  }
  const bool symmetric = Q == Q.transpose();
  auto finish = [symmetric](MatrixXd X) { return symmetric ? symmetrize(X) : X; };

  MatrixXd X = finish(solve_once(Q));
  MatrixXd R = F_.transpose() * X + X * F_ + Q;
  if (symmetric) R = symmetrize(R);
  X = finish(X + solve_once(R));

  const double res = lyap_residual(F_, X, Q);
  if (!(res <= kResidualTolerance * (1.0 + norm_inf(Q)))) {
    throw NumericalError("LyapunovSolver: residual " + std::to_string(res) +
                         " above tolerance; F is too close to singular pairing");
  }
  return X;
}

MatrixXd lyap_solve(const Eigen::Ref<const MatrixXd>& F, const Eigen::Ref<const MatrixXd>& Q) {
  return LyapunovSolver(F).solve(Q);
}

double lyap_residual(const Eigen::Ref<const MatrixXd>& F, const Eigen::Ref<const MatrixXd>& X,
                     const Eigen::Ref<const MatrixXd>& Q) {
  return norm_inf(F.transpose() * X + X * F + Q);
}

}  // namespace stochlq
