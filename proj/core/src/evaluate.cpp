#include "stochlq/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "stochlq/errors.hpp"
#include "stochlq/stability.hpp"

namespace stochlq {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;
using Stepper = odeint::controlled_runge_kutta<odeint::runge_kutta_dopri5<State>>;

/// Advances x from t to `target` with adaptive steps that land exactly on
/// every breakpoint in between. `dt` carries the step-size suggestion across
/// calls.
template <class Rhs>
void advance_piecewise(Stepper& stepper, Rhs&& rhs, State& x, double& t, double target,
                       const std::vector<double>& breakpoints, double& dt) {
  while (t < target) {
    auto next = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
    const double stop = (next != breakpoints.end() && *next < target) ? *next : target;
    const double h = std::min(dt, stop - t);
    const bool clipped = h < dt;
    double h_try = h;
    const double t_before = t;
    const auto result = stepper.try_step(rhs, x, t, h_try);
    if (result == odeint::success) {
      if (stop - t <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(stop))) t = stop;
      dt = clipped ? std::max(dt, h_try) : h_try;
    } else {
      if (h_try < 1e-13 * std::max(1.0, std::abs(t_before))) {
        throw IntegratorError("moment integrator: step size underflow at t = " + std::to_string(t_before));
      }
      dt = h_try;
    }
  }
}

Eigen::Index tri_size(Eigen::Index n) { return n * (n + 1) / 2; }

void pack_upper(const MatrixXd& M, double* out) {
  const auto n = M.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) *out++ = M(i, j);
}

MatrixXd unpack_upper(const double* in, Eigen::Index n) {
  MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      M(i, j) = *in;
      M(j, i) = *in;
      ++in;
    }
  return M;
}

/// State layout: [m (n) | upper(M) (n(n+1)/2) | J (1) | y_k (n each)].
class MomentEngine {
 public:
  MomentEngine(const SystemModel& sys, const MatrixXd& G, const MatrixXd& Gamma, const ControlSignal& u,
               const VectorXd& m0, const MatrixXd& M0, double tol)
      : sys_(sys), G_(G), Gamma_(Gamma), u_(u), stepper_(odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>())) {
    const auto n = sys.n();
    for (const auto& term : u.terms()) {
      if (const auto* fb = std::get_if<FeedbackControl>(&term)) feedback_.push_back(fb);
    }
    breakpoints_ = u.breakpoints();
    x_.assign(static_cast<std::size_t>(n + tri_size(n) + 1 + n * static_cast<Eigen::Index>(feedback_.size())), 0.0);
    Eigen::Map<VectorXd>(x_.data(), n) = m0;
    pack_upper(M0, x_.data() + n);
    for (std::size_t k = 0; k < feedback_.size(); ++k) {
      Eigen::Map<VectorXd>(x_.data() + y_offset(k), n) = feedback_[k]->y0;
    }
    dt_ = 1e-2;
  }

  void operator()(const State& x, State& dx, double t) const {
    const auto n = sys_.n();
    const auto& A = sys_.A();
    const Eigen::Map<const VectorXd> m(x.data(), n);
    const MatrixXd M = unpack_upper(x.data() + n, n);

    VectorXd u = u_.sampled_value(t);
    for (std::size_t k = 0; k < feedback_.size(); ++k) {
      const Eigen::Map<const VectorXd> y(x.data() + y_offset(k), n);
      u.noalias() += feedback_[k]->h.transpose() * y;
      Eigen::Map<VectorXd>(dx.data() + y_offset(k), n).noalias() = feedback_[k]->A_cl * y;
    }
    const VectorXd bu = sys_.b() * u;
    Eigen::Map<VectorXd>(dx.data(), n).noalias() = A * m + bu;

    MatrixXd dM = A * M + M * A.transpose() + bu * m.transpose() + m * bu.transpose();
    for (const auto& C : sys_.noise()) dM.noalias() += C * M * C.transpose();
    pack_upper(dM, dx.data() + n);

    dx[static_cast<std::size_t>(n + tri_size(n))] = G_.cwiseProduct(M).sum() + u.dot(Gamma_ * u);
  }

  void advance(double target) {
    advance_piecewise(stepper_, std::ref(*this), x_, t_, target, breakpoints_, dt_);
  }

  double t() const { return t_; }
  double cost() const { return x_[static_cast<std::size_t>(sys_.n() + tri_size(sys_.n()))]; }

  MomentState moments() const {
    const auto n = sys_.n();
    return MomentState{t_, Eigen::Map<const VectorXd>(x_.data(), n), unpack_upper(x_.data() + n, n)};
  }

  /// Stacked feedback states ȳ = (y_1, ..., y_K).
  VectorXd feedback_states() const {
    const auto n = sys_.n();
    VectorXd y(n * static_cast<Eigen::Index>(feedback_.size()));
    for (std::size_t k = 0; k < feedback_.size(); ++k) {
      y.segment(static_cast<Eigen::Index>(k) * n, n) = Eigen::Map<const VectorXd>(x_.data() + y_offset(k), n);
    }
    return y;
  }

  const std::vector<const FeedbackControl*>& feedback_terms() const { return feedback_; }

 private:
  std::size_t y_offset(std::size_t k) const {
    const auto n = sys_.n();
    return static_cast<std::size_t>(n + tri_size(n) + 1 + n * static_cast<Eigen::Index>(k));
  }

  const SystemModel& sys_;
  MatrixXd G_;
  MatrixXd Gamma_;
  const ControlSignal& u_;
  std::vector<const FeedbackControl*> feedback_;
  std::vector<double> breakpoints_;
  Stepper stepper_;
  State x_;
  double t_ = 0.0;
  double dt_ = 0.0;
};

void check_inputs(const SystemModel& sys, const ControlSignal& u, const InitialState& init) {
  if (u.dim() != sys.m()) throw DimensionError("control dimension does not match b");
  if (init.n() != sys.n()) throw DimensionError("initial state dimension does not match A");
  for (const auto& term : u.terms()) {
    if (const auto* fb = std::get_if<FeedbackControl>(&term)) {
      if (fb->A_cl.rows() != sys.n()) throw DimensionError("feedback control state dimension does not match A");
    }
  }
}

/// Bound on |∫_T^∞ E xᵀGx + uᵀΓu dt| given the engine state at T, valid once
/// every sampled term has ended.
class TailBound {
 public:
  TailBound(const SystemModel& sys, const CostModel& cost, const std::vector<const FeedbackControl*>& feedback) {
    const auto n = sys.n();
    const auto K = static_cast<Eigen::Index>(feedback.size());
    const auto N = n * (1 + K);
    MatrixXd A = MatrixXd::Zero(N, N);
    A.topLeftCorner(n, n) = sys.A();
    MatrixXd H(n * K, sys.m());
    for (Eigen::Index k = 0; k < K; ++k) {
      const auto* fb = feedback[static_cast<std::size_t>(k)];
      if (!(spectral_abscissa(fb->A_cl) < 0.0)) {
        throw TailError("cost: feedback control is not square-integrable (A_cl not Hurwitz)");
      }
      A.block(0, n * (k + 1), n, n) = sys.b() * fb->h.transpose();
      A.block(n * (k + 1), n * (k + 1), n, n) = fb->A_cl;
      H.middleRows(n * k, n) = fb->h;
    }
    std::vector<MatrixXd> noise;
    for (const auto& C : sys.noise()) {
      MatrixXd Ca = MatrixXd::Zero(N, N);
      Ca.topLeftCorner(n, n) = C;
      noise.push_back(std::move(Ca));
    }
    MatrixXd W = MatrixXd::Zero(N, N);
    W.topLeftCorner(n, n) = norm_2(cost.G()) * MatrixXd::Identity(n, n);
    if (K > 0) W.bottomRightCorner(n * K, n * K) = norm_2(cost.Gamma()) * H * H.transpose();
    try {
      X_ = stochastic_gramian(SystemModel(std::move(A), MatrixXd::Zero(N, 1), std::move(noise)), W);
    } catch (const SingularError&) {
      throw TailError("cost: augmented system is not mean-square stable; tail cannot be bounded");
    }
    n_ = n;
  }

  double operator()(const MomentState& s, const VectorXd& y) const {
    const auto N = X_.rows();
    MatrixXd Z(N, N);
    Z.topLeftCorner(n_, n_) = s.M;
    if (N > n_) {
      const auto r = N - n_;
      Z.topRightCorner(n_, r) = s.m * y.transpose();
      Z.bottomLeftCorner(r, n_) = y * s.m.transpose();
      Z.bottomRightCorner(r, r) = y * y.transpose();
    }
    return std::max(0.0, X_.cwiseProduct(Z).sum());
  }

 private:
  MatrixXd X_;
  Eigen::Index n_ = 0;
};

}  // namespace

std::vector<MomentState> integrate_moments(const SystemModel& sys, const ControlSignal& u, const InitialState& init,
                                           double T, const MomentOptions& options) {
  check_inputs(sys, u, init);
  if (!(T > 0.0) || !std::isfinite(T)) throw InputError("integrate_moments: horizon must be positive and finite");
  std::vector<double> outputs = options.output_times;
  if (outputs.empty()) outputs = {0.0, T};
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    if (outputs[k] < 0.0 || outputs[k] > T || (k > 0 && outputs[k] < outputs[k - 1])) {
      throw InputError("integrate_moments: output times must be sorted and inside [0, T]");
    }
  }
  MomentEngine engine(sys, MatrixXd::Zero(sys.n(), sys.n()), MatrixXd::Zero(sys.m(), sys.m()), u, init.mean(),
                      init.second_moment(), options.tol);
  std::vector<MomentState> trajectory;
  trajectory.reserve(outputs.size());
  for (double t_out : outputs) {
    engine.advance(t_out);
    trajectory.push_back(engine.moments());
  }
  return trajectory;
}

double covariance_min_eigenvalue(const MomentState& s) {
  return min_eigenvalue(MatrixXd(s.M - s.m * s.m.transpose()));
}

CostRun cost_run(const SystemModel& sys, const CostModel& cost, const ControlSignal& u, const InitialState& init,
                 const CostOptions& options) {
  check_inputs(sys, u, init);
  if (cost.G().rows() != sys.n() || cost.Gamma().rows() != sys.m()) {
    throw DimensionError("cost weights do not match the system");
  }
  const auto cert = check_stability(sys);
  if (!cert.stable()) throw TailError("cost: system is not mean-square stable; the cost is not finite");

  MomentEngine engine(sys, cost.G(), cost.Gamma(), u, init.mean(), init.second_moment(), options.tol);
  const TailBound tail(sys, cost, engine.feedback_terms());

  double T = options.horizon > 0.0 ? options.horizon : 10.0 / cert.margin;
  const auto bps = u.breakpoints();
  if (!bps.empty()) T = std::max(T, bps.back());

  for (;;) {
    engine.advance(T);
    const MomentState s = engine.moments();
    const double bound = tail(s, engine.feedback_states());
    const double value = engine.cost();
    if (bound <= options.tol * std::max(1.0, std::abs(value))) {
      return CostRun{value, T, bound, s};
    }
    T *= 1.5;
    if (T > options.max_horizon) {
      throw TailError("cost: tail bound " + std::to_string(bound) + " not certified below horizon " +
                      std::to_string(options.max_horizon));
    }
  }
}

CostBreakdown cost_phi(const SystemModel& sys, const CostModel& cost, const ControlSignal& u,
                       const InitialState& init, const CostOptions& options) {
  const CostRun total = cost_run(sys, cost, u, init, options);
  const CostRun quadratic =
      cost_run(sys, cost, u, InitialState::deterministic(VectorXd::Zero(sys.n())), options);
  const CostRun rho = cost_run(sys, cost, ControlSignal::zero(sys.m()), init, options);
  CostBreakdown out;
  out.total = total.value;
  out.quadratic = quadratic.value;
  out.constant_rho = rho.value;
  out.cross = total.value - quadratic.value - rho.value;
  out.horizon = std::max({total.horizon, quadratic.horizon, rho.horizon});
  out.truncation_error_bound = total.tail_bound;
  return out;
}

std::pair<double, double> rho_and_rho1(const SystemModel& sys, const CostModel& cost, const ThetaSolution& theta,
                                       const InitialState& init) {
  const MatrixXd XG = stochastic_gramian(sys, cost.G());
  const double rho = XG.cwiseProduct(init.second_moment()).sum();
  const double rho1 = init.mean().dot(theta.X * init.mean());
  return {rho, rho1};
}

double cost_phi1(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& Theta,
                 const Eigen::Ref<const MatrixXd>& Gamma, const ControlSignal& u, const VectorXd& y0,
                 const CostOptions& options) {
  // The noise-free moment flow carries M = yyᵀ, so tr(ΘM) = yᵀΘy.
  const SystemModel deterministic(sys.A(), sys.b(), {MatrixXd::Zero(sys.n(), sys.n())});
  return cost_run(deterministic, CostModel(Theta, Gamma), u, InitialState::deterministic(y0), options).value;
}

double deterministic_cross_term(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& Theta,
                                const ControlSignal& u, const VectorXd& y0, double T, double tol) {
  if (u.dim() != sys.m() || y0.size() != sys.n() || Theta.rows() != sys.n()) {
    throw DimensionError("deterministic_cross_term: dimension mismatch");
  }
  if (!(T > 0.0)) throw InputError("deterministic_cross_term: horizon must be positive");
  const auto n = sys.n();
  std::vector<const FeedbackControl*> feedback;
  for (const auto& term : u.terms()) {
    if (const auto* fb = std::get_if<FeedbackControl>(&term)) feedback.push_back(fb);
  }
  // [y_u (n) | y_a (n) | J | feedback states]
  const auto off = [n](std::size_t k) { return static_cast<std::size_t>(2 * n + 1 + n * static_cast<Eigen::Index>(k)); };
  State x(off(feedback.size()), 0.0);
  Eigen::Map<VectorXd>(x.data() + n, n) = y0;
  for (std::size_t k = 0; k < feedback.size(); ++k) Eigen::Map<VectorXd>(x.data() + off(k), n) = feedback[k]->y0;
  const MatrixXd Th = Theta;

  auto rhs = [&](const State& s, State& ds, double t) {
    const Eigen::Map<const VectorXd> yu(s.data(), n), ya(s.data() + n, n);
    VectorXd v = u.sampled_value(t);
    for (std::size_t k = 0; k < feedback.size(); ++k) {
      const Eigen::Map<const VectorXd> y(s.data() + off(k), n);
      v.noalias() += feedback[k]->h.transpose() * y;
      Eigen::Map<VectorXd>(ds.data() + off(k), n).noalias() = feedback[k]->A_cl * y;
    }
    Eigen::Map<VectorXd>(ds.data(), n).noalias() = sys.A() * yu + sys.b() * v;
    Eigen::Map<VectorXd>(ds.data() + n, n).noalias() = sys.A() * ya;
    ds[static_cast<std::size_t>(2 * n)] = 2.0 * yu.dot(Th * ya);
  };
  Stepper stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
  double t = 0.0, dt = 1e-2;
  advance_piecewise(stepper, rhs, x, t, T, u.breakpoints(), dt);
  return x[static_cast<std::size_t>(2 * n)];
}

void write_moments_csv(std::ostream& out, const std::vector<MomentState>& trajectory) {
  if (trajectory.empty()) return;
  const auto n = trajectory.front().m.size();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",m_" << (i + 1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) out << ",M_" << (i + 1) << (j + 1);
  out << '\n' << std::setprecision(17);
  for (const auto& s : trajectory) {
    out << s.t;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << s.m(i);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) out << ',' << s.M(i, j);
    out << '\n';
  }
}

void write_moments_csv(const std::filesystem::path& path, const std::vector<MomentState>& trajectory) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_moments_csv(out, trajectory);
}

}  // namespace stochlq
