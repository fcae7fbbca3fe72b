#include "stochlq/stability.hpp"

#include <algorithm>

#include "stochlq/errors.hpp"

namespace stochlq {

MatrixXd second_moment_generator(const SystemModel& sys) {
  const auto n = sys.n();
  const MatrixXd I = MatrixXd::Identity(n, n);
  // vec(AM) = (I⊗A)vec M, vec(MAᵀ) = (A⊗I)vec M, vec(CMCᵀ) = (C⊗C)vec M.
  MatrixXd L = kron(sys.A(), I) + kron(I, sys.A());
  for (const auto& C : sys.noise()) L += kron(C, C);
  return L;
}

StabilityCertificate check_stability(const SystemModel& sys, double floor) {
  StabilityCertificate cert;
  cert.hurwitz_abscissa = spectral_abscissa(sys.A());
  cert.ms_abscissa = spectral_abscissa(second_moment_generator(sys));
  const double worst = std::max(cert.hurwitz_abscissa, cert.ms_abscissa);
  if (worst < -floor) {
    cert.verdict = StabilityVerdict::Stable;
    cert.margin = -worst;
  }
  return cert;
}

MatrixXd stochastic_gramian(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& W) {
  const auto n = sys.n();
  if (W.rows() != n || W.cols() != n) throw DimensionError("stochastic_gramian: W must be n x n");
  // The adjoint of M ↦ AM + MAᵀ + Σ C M Cᵀ under ⟨X, M⟩ = tr(XᵀM) is
  // X ↦ AᵀX + XA + Σ CᵀXC, represented by the transposed generator.
  const MatrixXd L = second_moment_generator(sys).transpose();
  Eigen::FullPivLU<MatrixXd> lu(L);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw SingularError("stochastic_gramian: second-moment generator is singular");
  }
  const MatrixXd Wd = W;
  const VectorXd x = lu.solve(-Eigen::Map<const VectorXd>(Wd.data(), n * n));
  return symmetrize(Eigen::Map<const MatrixXd>(x.data(), n, n));
}

const char* to_string(StabilityVerdict v) {
  return v == StabilityVerdict::Stable ? "Stable" : "Unstable";
}

}  // namespace stochlq
