#include "stochlq/lqr.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "stochlq/errors.hpp"
#include "stochlq/lyapunov.hpp"

namespace stochlq {

using cd = std::complex<double>;

namespace {

// Swaps the adjacent diagonal entries k, k+1 of the upper-triangular T while
// keeping H = U T Uᴴ.
void swap_schur(MatrixXcd& T, MatrixXcd& U, Eigen::Index k) {
  const cd t11 = T(k, k), t22 = T(k + 1, k + 1), t12 = T(k, k + 1);
  // Eigenvector of the 2×2 block for t22.
  cd c = t12, s = t22 - t11;
  const double norm = std::hypot(std::abs(c), std::abs(s));
  if (norm == 0.0) return;
  c /= norm;
  s /= norm;
  Eigen::Matrix2cd G;
  G << c, -std::conj(s), s, std::conj(c);
  const auto N = T.rows();
  T.block(k, 0, 2, N) = (G.adjoint() * T.block(k, 0, 2, N)).eval();
  T.block(0, k, N, 2) = (T.block(0, k, N, 2) * G).eval();
  U.block(0, k, N, 2) = (U.block(0, k, N, 2) * G).eval();
  T(k + 1, k) = 0.0;
}

MatrixXd stable_subspace_solution(const MatrixXd& H, Eigen::Index n) {
  Eigen::ComplexSchur<MatrixXcd> schur(H.cast<cd>());
  if (schur.info() != Eigen::Success) throw RiccatiError("Riccati: Schur factorization of the Hamiltonian failed");
  MatrixXcd T = schur.matrixT();
  MatrixXcd U = schur.matrixU();
  const auto N = T.rows();

  const double axis_tol = 1e-10 * std::max(1.0, norm_inf(H));
  Eigen::Index stable = 0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const double re = T(i, i).real();
    if (std::abs(re) <= axis_tol) {
      throw RiccatiError("Riccati: Hamiltonian has eigenvalues on the imaginary axis; no stabilizing solution");
    }
    if (re < 0.0) ++stable;
  }
  if (stable != n) throw RiccatiError("Riccati: Hamiltonian does not split into n stable and n unstable modes");

  // Bubble the stable eigenvalues to the leading block.
  for (bool swapped = true; swapped;) {
    swapped = false;
    for (Eigen::Index k = 0; k + 1 < N; ++k) {
      if (T(k, k).real() > 0.0 && T(k + 1, k + 1).real() < 0.0) {
        swap_schur(T, U, k);
        swapped = true;
      }
    }
  }

  const MatrixXcd U1 = U.topLeftCorner(n, n);
  const MatrixXcd U2 = U.bottomLeftCorner(n, n);
  Eigen::FullPivLU<MatrixXcd> lu(U1);
  if (!lu.isInvertible()) throw RiccatiError("Riccati: stable subspace is not a graph; no stabilizing solution");
  // P = U2 U1⁻¹  ⇔  U1ᵀ Pᵀ = U2ᵀ.
  const MatrixXcd P = U1.transpose().fullPivLu().solve(U2.transpose()).transpose();
  return symmetrize(P.real());
}

}  // namespace

double riccati_residual(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& Theta,
                        const Eigen::Ref<const MatrixXd>& Gamma, const Eigen::Ref<const MatrixXd>& P) {
  const MatrixXd& A = sys.A();
  const MatrixXd& b = sys.b();
  const MatrixXd Pb = P * b;
  return norm_inf(A.transpose() * P + P * A - Pb * Gamma.ldlt().solve(Pb.transpose()) + Theta);
}

FeedbackLaw solve_deterministic_lqr(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& Theta,
                                    const Eigen::Ref<const MatrixXd>& Gamma, const LqrOptions& options) {
  const auto n = sys.n();
  const auto m = sys.m();
  if (Theta.rows() != n || Theta.cols() != n || Gamma.rows() != m || Gamma.cols() != m) {
    throw DimensionError("solve_deterministic_lqr: dimension mismatch");
  }
  const MatrixXd Th = symmetrize(Theta);
  const MatrixXd Gm = symmetrize(Gamma);
  Eigen::LLT<MatrixXd> chol(Gm);
  if (chol.info() != Eigen::Success || min_eigenvalue(Gm) <= 1e-12 * std::max(1.0, norm_inf(Gm))) {
    throw SingularError("solve_deterministic_lqr: Gamma is not positive definite");
  }
  const MatrixXd& A = sys.A();
  const MatrixXd& b = sys.b();
  const MatrixXd S = symmetrize(b * chol.solve(b.transpose()));

  MatrixXd H(2 * n, 2 * n);
  H << A, -S, -Th, -A.transpose();
  MatrixXd P = stable_subspace_solution(H, n);

  // Newton: (A − SP)ᵀΔ + Δ(A − SP) = −Res(P).
  auto residual_matrix = [&](const MatrixXd& X) {
    return symmetrize(A.transpose() * X + X * A - X * S * X + Th);
  };
  double res = norm_inf(residual_matrix(P));
  for (int it = 0; it < options.newton_iterations; ++it) {
    const MatrixXd Acl = A - S * P;
    if (spectral_abscissa(Acl) >= 0.0) break;
    MatrixXd step;
    try {
      step = lyap_solve(Acl, residual_matrix(P));
    } catch (const NumericalError&) {
      break;
    }
    const MatrixXd candidate = symmetrize(P + step);
    const double cand_res = norm_inf(residual_matrix(candidate));
    if (!(cand_res < res)) break;
    P = candidate;
    res = cand_res;
    if (res <= 1e-3 * options.tol * std::max(1.0, norm_inf(P))) break;
  }

  FeedbackLaw law;
  law.P = P;
  law.h = -P * b * chol.solve(MatrixXd::Identity(m, m));
  law.A_cl = A + b * law.h.transpose();
  law.riccati_residual = riccati_residual(sys, Th, Gm, P);
  law.closed_loop_abscissa = spectral_abscissa(law.A_cl);
  if (!(law.closed_loop_abscissa < 0.0)) {
    throw RiccatiError("solve_deterministic_lqr: closed loop A + b h^T is not Hurwitz");
  }
  const double scale = std::max({1.0, norm_inf(P), norm_inf(Th)});
  if (!(law.riccati_residual <= options.tol * scale)) {
    throw RiccatiError("solve_deterministic_lqr: Riccati residual " + std::to_string(law.riccati_residual) +
                       " above tolerance");
  }
  return law;
}

FeedbackLaw solve_optimal_law(const SystemModel& sys, const ThetaSolution& theta,
                              const Eigen::Ref<const MatrixXd>& Gamma, const FrequencyReport& frequency,
                              const LqrOptions& options) {
  switch (frequency.verdict) {
    case FrequencyVerdict::StrictlyPositive:
      return solve_deterministic_lqr(sys, theta.Theta, Gamma, options);
    case FrequencyVerdict::NonnegativeOnly:
      if (options.regularization && *options.regularization > 0.0) {
        const MatrixXd reg = Gamma + *options.regularization * MatrixXd::Identity(Gamma.rows(), Gamma.cols());
        return solve_deterministic_lqr(sys, theta.Theta, reg, options);
      }
      throw GateError("frequency condition holds only with delta = 0; existence of an optimal control is "
                      "undetermined (pass a positive regularization to solve with Gamma + eps*I)");
    case FrequencyVerdict::Fails:
      break;
  }
  throw GateError("frequency condition fails: no optimal control exists");
}

SynthesizedControl synthesize_control(const FeedbackLaw& law, const InitialState& init,
                                      const SynthesisOptions& options) {
  if (!(options.dt > 0.0) || options.horizon < 0.0) throw InputError("synthesize_control: need dt > 0, T >= 0");
  const VectorXd& y0 = init.mean();
  if (y0.size() != law.A_cl.rows()) throw DimensionError("synthesize_control: initial mean has wrong length");

  SynthesizedControl out{ControlSignal::feedback(law.h, law.A_cl, y0), std::nullopt, options.horizon};
  const double y0_norm = y0.norm();
  auto decayed = [&](double T) { return ((law.A_cl * T).exp() * y0).norm() <= options.decay * y0_norm; };

  if (options.horizon == 0.0) {
    if (y0_norm == 0.0) {
      out.horizon = options.dt;
    } else {
      double T = std::max(options.dt, 1.0 / std::max(std::abs(law.closed_loop_abscissa), 1e-300));
      while (!decayed(T)) {
        T *= 2.0;
        if (T > 1e7) throw HorizonError("synthesize_control: closed loop decays too slowly to truncate");
      }
      out.horizon = T;
    }
  } else if (options.require_decay && y0_norm > 0.0 && !decayed(options.horizon)) {
    throw HorizonError("synthesize_control: horizon too short for the requested decay");
  }

  if (options.sampled) {
    const auto steps = static_cast<std::size_t>(std::ceil(out.horizon / options.dt - 1e-9));
    std::vector<double> times(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) times[k] = static_cast<double>(k) * options.dt;
    out.horizon = times.back();
    out.sampled = ControlSignal::sampled(std::move(times), out.feedback.sample_grid(options.dt, steps));
  }
  return out;
}

}  // namespace stochlq
