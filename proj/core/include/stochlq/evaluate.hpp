#pragma once

#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "stochlq/control.hpp"
#include "stochlq/model.hpp"
#include "stochlq/theta.hpp"

namespace stochlq {

/// First and second moments of x(t).
struct MomentState {
  double t = 0.0;
  VectorXd m;  // E x(t)
  MatrixXd M;  // E x(t)x(t)ᵀ, exactly symmetric
};

struct MomentOptions {
  double tol = 1e-10;               // local absolute and relative tolerance
  std::vector<double> output_times; // sorted, inside [0, T]; empty means {0, T}
};

/// Integrates m' = Am + bu, M' = AM + MAᵀ + bu mᵀ + m uᵀbᵀ + Σ C_j M C_jᵀ
/// from (E a, E aaᵀ) with adaptive Dormand–Prince steps that stop at every
/// node of sampled controls. M is carried as its upper triangle, so it is
/// symmetric at every accepted step.
/// Throws InputError for a bad horizon or output grid and IntegratorError
/// on step-size underflow.
std::vector<MomentState> integrate_moments(const SystemModel& sys, const ControlSignal& u, const InitialState& init,
                                           double T, const MomentOptions& options = {});

/// λ_min(M − m mᵀ).
double covariance_min_eigenvalue(const MomentState& s);

/// Φ[u] split as (u,Ru) + 2(r,u) + ρ.
struct CostBreakdown {
  double total = 0.0;         // Φ[u]
  double quadratic = 0.0;     // cost of u from a = 0
  double cross = 0.0;         // total − quadratic − constant_rho
  double constant_rho = 0.0;  // cost of u = 0 from a
  double horizon = 0.0;       // largest horizon used by the three runs
  double truncation_error_bound = 0.0;  // bound on the omitted tail of `total`
};

struct CostOptions {
  double tol = 1e-10;       // integrator tolerance; also the relative tail target
  double horizon = 0.0;     // initial horizon; zero picks 10/margin
  double max_horizon = 1e6;
};

struct CostRun {
  double value = 0.0;
  double horizon = 0.0;
  double tail_bound = 0.0;
  MomentState final_state;
};

/// Infinite-horizon ∫ E xᵀGx + uᵀΓu dt through the moment ODEs (with the
/// cost carried as an extra ODE state). The horizon is extended by 1.5×
/// until the certified tail bound drops below tol·max(1, |value|). The bound
/// is tr(X_W·Z(T)) for the stochastic Gramian X_W of the system augmented
/// with the feedback states, using weights ‖G‖₂I and ‖Γ‖₂hhᵀ.
/// Throws TailError when the system is not mean-square stable or the tail
/// cannot be certified below max_horizon.
CostRun cost_run(const SystemModel& sys, const CostModel& cost, const ControlSignal& u, const InitialState& init,
                 const CostOptions& options = {});

/// Three runs: (u, a), (u, 0), (0, a). The cross term is their difference.
CostBreakdown cost_phi(const SystemModel& sys, const CostModel& cost, const ControlSignal& u,
                       const InitialState& init, const CostOptions& options = {});

/// ρ = tr(X_G·E aaᵀ) with the stochastic Gramian of G, and
/// ρ₁ = (E a)ᵀ X_Θ (E a) with AᵀX_Θ + X_ΘA = −Θ.
std::pair<double, double> rho_and_rho1(const SystemModel& sys, const CostModel& cost, const ThetaSolution& theta,
                                       const InitialState& init);

/// Φ₁[u] = ∫ yᵀΘy + uᵀΓu dt for y' = Ay + bu, y(0) = y0 (infinite horizon,
/// same truncation rule as cost_phi).
double cost_phi1(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& Theta,
                 const Eigen::Ref<const MatrixXd>& Gamma, const ControlSignal& u, const VectorXd& y0,
                 const CostOptions& options = {});

/// 2∫₀^T y_uᵀΘ y_a dt from two deterministic trajectories: y_u from 0 driven
/// by u, y_a from y0 undriven.
double deterministic_cross_term(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& Theta,
                                const ControlSignal& u, const VectorXd& y0, double T, double tol = 1e-10);

/// CSV with header `t,m_1..m_n,M_11,M_12,..,M_nn` (upper triangle, row-major).
void write_moments_csv(std::ostream& out, const std::vector<MomentState>& trajectory);
void write_moments_csv(const std::filesystem::path& path, const std::vector<MomentState>& trajectory);

}  // namespace stochlq
