#pragma once

#include <optional>

#include "stochlq/control.hpp"
#include "stochlq/frequency.hpp"
#include "stochlq/model.hpp"
#include "stochlq/theta.hpp"

namespace stochlq {

/// Optimal law of the deterministic problem y' = Ay + bu, ∫ yᵀΘy + uᵀΓu dt,
/// realized as u = hᵀy.
struct FeedbackLaw {
  MatrixXd P;    // stabilizing solution of AᵀP + PA − PbΓ⁻¹bᵀP + Θ = 0
  MatrixXd h;    // n×m, hᵀ = −Γ⁻¹bᵀP
  MatrixXd A_cl; // A + bhᵀ
  double riccati_residual = 0.0;
  double closed_loop_abscissa = 0.0;
};

struct LqrOptions {
  double tol = 1e-10;
  int newton_iterations = 50;
  /// Only consulted by solve_optimal_law: when set, a NonnegativeOnly
  /// frequency verdict is accepted and Γ + εI is used in place of Γ.
  std::optional<double> regularization;
};

/// ‖AᵀP + PA − PbΓ⁻¹bᵀP + Θ‖_∞.
double riccati_residual(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& Theta,
                        const Eigen::Ref<const MatrixXd>& Gamma, const Eigen::Ref<const MatrixXd>& P);

/// Stabilizing ARE solution through the stable invariant subspace of the
/// Hamiltonian [[A, −bΓ⁻¹bᵀ], [−Θ, −Aᵀ]] (ordered complex Schur form),
/// followed by Newton refinement. Θ may be indefinite.
/// Throws SingularError if Γ is not numerically positive definite and
/// RiccatiError if no stabilizing solution is found.
FeedbackLaw solve_deterministic_lqr(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& Theta,
                                    const Eigen::Ref<const MatrixXd>& Gamma, const LqrOptions& options = {});

/// solve_deterministic_lqr behind the frequency gate. StrictlyPositive
/// proceeds; NonnegativeOnly proceeds only with options.regularization;
/// Fails never does. Refusals throw GateError.
FeedbackLaw solve_optimal_law(const SystemModel& sys, const ThetaSolution& theta,
                              const Eigen::Ref<const MatrixXd>& Gamma, const FrequencyReport& frequency,
                              const LqrOptions& options = {});

struct SynthesisOptions {
  /// Sampled horizon. Zero selects the shortest T (doubling from 1/|abscissa|)
  /// with ‖y(T)‖ ≤ decay·‖y(0)‖.
  double horizon = 0.0;
  double dt = 1e-2;
  bool sampled = false;
  double decay = 1e-8;
  /// With an explicit horizon: throw HorizonError if it is too short for the
  /// decay criterion.
  bool require_decay = false;
};

struct SynthesizedControl {
  ControlSignal feedback;                // u(t) = hᵀ e^{A_cl t} E a
  std::optional<ControlSignal> sampled;  // same on {0, dt, ..., T}, zero after T
  double horizon = 0.0;
};

SynthesizedControl synthesize_control(const FeedbackLaw& law, const InitialState& init,
                                      const SynthesisOptions& options = {});

}  // namespace stochlq
