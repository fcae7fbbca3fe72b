#pragma once

#include "stochlq/model.hpp"

namespace stochlq {

/// Default margin floor: a mean-square abscissa above −1e-9 is not certified.
inline constexpr double kDefaultStabilityFloor = 1e-9;

enum class StabilityVerdict { Stable, Unstable };

struct StabilityCertificate {
  double hurwitz_abscissa = 0.0;  // max Re λ(A)
  double ms_abscissa = 0.0;       // max Re λ(A⊗I + I⊗A + Σ C_j⊗C_j)
  StabilityVerdict verdict = StabilityVerdict::Unstable;
  double margin = 0.0;            // −max(abscissae) when Stable, 0 otherwise

  bool stable() const { return verdict == StabilityVerdict::Stable; }
};

/// n²×n² generator of the second-moment flow M' = AM + MAᵀ + Σ C_j M C_jᵀ
/// acting on column-stacked vec(M).
MatrixXd second_moment_generator(const SystemModel& sys);

/// Certifies A Hurwitz and mean-square exponential stability of the
/// uncontrolled system. Both abscissae must lie below −floor.
StabilityCertificate check_stability(const SystemModel& sys, double floor = kDefaultStabilityFloor);

/// Stochastic observability Gramian: X with AᵀX + XA + Σ C_jᵀXC_j + W = 0,
/// solved directly in vec coordinates with the transposed generator. For a
/// mean-square stable system, ∫₀^∞ E xᵀWx dt = tr(X·E x(0)x(0)ᵀ) when u = 0.
/// Throws SingularError when the generator is singular.
MatrixXd stochastic_gramian(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& W);

const char* to_string(StabilityVerdict v);

}  // namespace stochlq
