#pragma once

#include <cstddef>

#include "stochlq/model.hpp"
#include "stochlq/theta.hpp"

namespace stochlq {

enum class FrequencyVerdict {
  StrictlyPositive,  // Π(λ) ⪰ δI for all λ with δ = delta_hat > tol
  NonnegativeOnly,   // |delta_hat| ≤ tol: (6) plausible, (7) not certified
  Fails,             // delta_hat < −tol
};

struct FrequencyReport {
  double delta_hat = 0.0;      // certified lower bound on inf_λ λ_min(Π(λ))
  double min_observed = 0.0;   // smallest λ_min(Π) actually evaluated (λ_min(Γ) counts as λ = ∞)
  double lambda_argmin = 0.0;  // where min_observed is attained; +inf for the λ = ∞ limit
  double lambda_max = 0.0;     // scan cutoff
  std::size_t grid_points = 0;
  double tail_bound = 0.0;     // bound on ‖Π(λ) − Γ‖ for λ ≥ lambda_max
  double tol = 0.0;
  FrequencyVerdict verdict = FrequencyVerdict::Fails;
};

struct FrequencyOptions {
  double tol = 1e-9;
  std::size_t max_evaluations = 500000;
};

/// x*Θx + u*Γu. Throws DimensionError on mismatched sizes and
/// InvariantError if the imaginary part is not negligible.
double hermitian_form_F(const Eigen::Ref<const MatrixXd>& Theta, const Eigen::Ref<const MatrixXd>& Gamma,
                        const Eigen::Ref<const VectorXcd>& x, const Eigen::Ref<const VectorXcd>& u);

/// Π(λ) = (g(λ)b)* Θ (g(λ)b) + Γ, so that u*Π(λ)u = F(g(λ)bu, u).
MatrixXcd pi_matrix(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& Theta,
                    const Eigen::Ref<const MatrixXd>& Gamma, double lambda);
MatrixXcd pi_matrix(const SystemModel& sys, const ThetaSolution& theta,
                    const Eigen::Ref<const MatrixXd>& Gamma, double lambda);

/// Certified decision of the frequency conditions over all real λ.
///
/// λ ≥ 0 suffices because Π(−λ) = Π(λ)ᵀ. On [0, λ_max] a branch-and-bound
/// scan keeps, for every interval, a lower bound on λ_min(Π) from the
/// first-order matrix Taylor pencil at the endpoints (whose λ_min is concave,
/// hence minimal at an end) minus ½·sup‖Π''‖·(w/2)², with
/// ‖Π''‖ ≤ 6‖Θ‖‖b‖²‖g‖⁴ and ‖g‖ bounded through the 1-Lipschitz
/// σ_min(iλI − A). Intervals are bisected until every bound is within tol/10
/// of the best observed value. Beyond λ_max, λ_min(Π) ≥ λ_min(Γ) − tail_bound
/// with tail_bound = ‖Θ‖‖b‖²/(λ_max − ‖A‖)² ≤ tol/10.
/// Throws ConvergenceError if the evaluation budget runs out.
FrequencyReport check_frequency_condition(const SystemModel& sys, const ThetaSolution& theta,
                                          const Eigen::Ref<const MatrixXd>& Gamma,
                                          const FrequencyOptions& options = {});

const char* to_string(FrequencyVerdict v);

}  // namespace stochlq
