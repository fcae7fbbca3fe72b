#pragma once

#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "stochlq/linalg.hpp"

namespace stochlq {

/// u(t) = hᵀ y(t) with y' = A_cl y, y(0) = y0. Square-integrable when A_cl is
/// Hurwitz.
struct FeedbackControl {
  MatrixXd h;     // n×m
  MatrixXd A_cl;  // n×n, A + b hᵀ
  VectorXd y0;
};

/// Piecewise-linear interpolation of `values` over the strictly increasing
/// grid `times` (times[0] = 0). Identically zero for t > times.back().
struct SampledControl {
  std::vector<double> times;
  std::vector<VectorXd> values;
};

/// A deterministic open-loop control t ↦ u(t) ∈ ℝᵐ, stored as a sum of
/// feedback-generated and sampled terms. A single term is the usual case;
/// sums appear when perturbing an optimal control.
class ControlSignal {
 public:
  using Term = std::variant<FeedbackControl, SampledControl>;

  /// u ≡ 0.
  static ControlSignal zero(Eigen::Index m);
  /// Throws DimensionError on inconsistent shapes.
  static ControlSignal feedback(MatrixXd h, MatrixXd A_cl, VectorXd y0);
  /// Throws InvariantError on a grid that is not strictly increasing from 0
  /// or on non-finite values, DimensionError on mixed dimensions.
  static ControlSignal sampled(std::vector<double> times, std::vector<VectorXd> values);

  Eigen::Index dim() const { return m_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  VectorXd value(double t) const;
  /// Sum of the sampled terms only.
  VectorXd sampled_value(double t) const;

  /// Values at t_k = k·dt, k = 0..steps. Feedback terms are propagated with
  /// the exact one-step transition e^{A_cl dt}.
  std::vector<VectorXd> sample_grid(double dt, std::size_t steps) const;

  /// Interior nodes of every sampled term, sorted and deduplicated. The
  /// signal is smooth between consecutive breakpoints.
  std::vector<double> breakpoints() const;

  ControlSignal operator+(const ControlSignal& other) const;
  ControlSignal scaled(double factor) const;

 private:
  explicit ControlSignal(Eigen::Index m) : m_(m) {}

  Eigen::Index m_ = 0;
  std::vector<Term> terms_;
};

/// Sampled-control file: {"times": [...], "values": [[u_1..u_m], ...]}.
ControlSignal sampled_from_json(const nlohmann::json& doc);
nlohmann::json sampled_to_json(const SampledControl& s);

}  // namespace stochlq
