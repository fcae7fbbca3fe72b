#include "stochlq/theta.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stochlq/errors.hpp"

namespace stochlq {

using cd = std::complex<double>;

MatrixXcd TransferFunction::resolvent_matrix(double lambda) const {
  MatrixXcd M = -A_.cast<cd>();
  M.diagonal().array() += cd(0.0, lambda);
  return M;
}

MatrixXcd TransferFunction::operator()(double lambda) const {
  return resolvent_matrix(lambda).partialPivLu().inverse();
}

MatrixXcd TransferFunction::apply(double lambda, const Eigen::Ref<const MatrixXd>& rhs) const {
  return resolvent_matrix(lambda).partialPivLu().solve(rhs.cast<cd>());
}

NoiseOperator::NoiseOperator(const SystemModel& sys) : sys_(sys), lyap_(sys.A()) {}

MatrixXd NoiseOperator::noise_sandwich(const Eigen::Ref<const MatrixXd>& X) const {
  MatrixXd out = MatrixXd::Zero(sys_.n(), sys_.n());
  for (const auto& C : sys_.noise()) out.noalias() += C.transpose() * X * C;
  return symmetrize(out);
}

MatrixXd NoiseOperator::operator()(const Eigen::Ref<const MatrixXd>& W) const {
  return noise_sandwich(lyap_.solve(W));
}

MatrixXd apply_T(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& W) {
  return NoiseOperator(sys)(W);
}

// --------------------------------------------------------------------------
// Frequency-domain quadrature oracle.

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
using Gauss = boost::math::quadrature::gauss<double, 7>;

struct Panel {
  double a;
  double b;
  MatrixXd value;
  double error;
};

class FrequencyIntegrand {
 public:
  FrequencyIntegrand(const SystemModel& sys, const MatrixXd& W) : sys_(sys), g_(sys.A()), W_(W) {}

  // Re Σ_j (g C_j)* W (g C_j); the imaginary part is odd in λ and cancels.
  MatrixXd operator()(double lambda) {
    ++evaluations;
    MatrixXd out = MatrixXd::Zero(sys_.n(), sys_.n());
    for (const auto& C : sys_.noise()) {
      const MatrixXcd Z = g_.apply(lambda, C);
      out += (Z.adjoint() * W_.cast<cd>() * Z).real();
    }
    return out;
  }

  std::size_t evaluations = 0;

 private:
  const SystemModel& sys_;
  TransferFunction g_;
  MatrixXd W_;
};

Panel integrate_panel(FrequencyIntegrand& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const auto& x = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();

  MatrixXd f0 = f(mid);
  MatrixXd kronrod = wk[0] * f0;
  MatrixXd gauss = wg[0] * f0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const MatrixXd pair = f(mid + half * x[i]) + f(mid - half * x[i]);
    kronrod += wk[i] * pair;
    if (i % 2 == 0) gauss += wg[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return Panel{a, b, kronrod, (kronrod - gauss).cwiseAbs().maxCoeff()};
}

}  // namespace

MatrixXd quadrature_T(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& W, double rel_tol,
                      const QuadratureOptions& options) {
  if (!(rel_tol > 1e-12 && rel_tol < 1e-2)) {
    throw InputError("quadrature_T: rel_tol must lie in (1e-12, 1e-2)");
  }
  if (W.rows() != sys.n() || W.cols() != sys.n()) throw DimensionError("quadrature_T: W must be n x n");
  const auto n = sys.n();

  double noise_gain = 0.0;
  for (const auto& C : sys.noise()) noise_gain += std::pow(norm_2(C), 2);
  if (noise_gain == 0.0) return MatrixXd::Zero(n, n);
  const double a_norm = norm_2(sys.A());
  const double tail_constant = noise_gain * norm_2(W) / M_PI;  // (1/π) ∫_Λ^∞ K/(λ−a)² = that/(Λ−a)

  FrequencyIntegrand f(sys, MatrixXd(W));
  // Panels on [0, Λ]: resolution set by ‖A‖, then geometric growth.
  const double unit = std::max(1.0, a_norm);
  std::vector<Panel> panels;
  double edge = 0.0;
  for (int k = 0; k < 8; ++k) {
    panels.push_back(integrate_panel(f, edge, edge + 0.5 * unit));
    edge += 0.5 * unit;
  }

  auto total = [&] {
    MatrixXd sum = MatrixXd::Zero(n, n);
    double err = 0.0;
    for (const auto& p : panels) {
      sum += p.value;
      err += p.error;
    }
    return std::pair{sum, err};
  };

  for (;;) {
    auto [sum, err] = total();
    const double scale = std::max((sum / M_PI).cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const double target = 0.25 * rel_tol * scale;
    const bool tail_ok = edge > 2.0 * a_norm && tail_constant / (edge - a_norm) <= target;
    const bool quad_ok = err / M_PI <= target;
    if (tail_ok && quad_ok) return symmetrize(sum / M_PI);
    if (f.evaluations > options.max_evaluations) {
      throw ConvergenceError("quadrature_T: evaluation budget exhausted before reaching rel_tol");
    }
    if (!tail_ok) {
      panels.push_back(integrate_panel(f, edge, 2.0 * edge));
      edge *= 2.0;
      continue;
    }
    // Bisect the panel with the largest error estimate. Ties resolve to the
    // lowest index so the result does not depend on anything but the input.
    auto worst = std::max_element(panels.begin(), panels.end(),
                                  [](const Panel& l, const Panel& r) { return l.error < r.error; });
    const double a = worst->a, b = worst->b, mid = 0.5 * (a + b);
    *worst = integrate_panel(f, a, mid);
    panels.push_back(integrate_panel(f, mid, b));
  }
}

// --------------------------------------------------------------------------
// Θ = G + T(Θ).

namespace {

void fill_residuals(const NoiseOperator& T, const MatrixXd& G, ThetaSolution& sol) {
  const auto& A = T.system().A();
  sol.X = T.gramian(sol.Theta);
  sol.residual_eq4 = norm_inf(sol.Theta - G - T.noise_sandwich(sol.X));
  sol.residual_gramian =
      norm_inf(A.transpose() * sol.X + sol.X * A + T.noise_sandwich(sol.X) + G);
}

ThetaSolution solve_direct(const NoiseOperator& T, const MatrixXd& G) {
  const auto n = G.rows();
  const auto N = n * (n + 1) / 2;
  MatrixXd K(N, N);
  for (Eigen::Index k = 0; k < N; ++k) K.col(k) = sym_vec(T(sym_basis(k, n)));
  const MatrixXd system = MatrixXd::Identity(N, N) - K;
  // rcond of the LU factors is blind to scale (it is 1 for any 1×1 system),
  // so compare σ_min(I − K) against the size of the operator itself.
  const VectorXd sv = system.jacobiSvd().singularValues();
  Eigen::FullPivLU<MatrixXd> lu(system);
  if (!lu.isInvertible() || sv(N - 1) <= 1e-13 * (1.0 + norm_2(K))) {
    throw SingularError("solve_theta: (I - T) is singular; the system is not mean-square stable");
  }
  ThetaSolution sol;
  sol.method = ThetaMethod::Direct;
  sol.Theta = sym_unvec(lu.solve(sym_vec(G)), n);
  return sol;
}

ThetaSolution solve_fixed_point(const NoiseOperator& T, const MatrixXd& G, const ThetaOptions& opt) {
  ThetaSolution sol;
  sol.method = ThetaMethod::FixedPoint;
  MatrixXd theta = G;
  double min_update = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opt.max_iterations; ++k) {
    MatrixXd next = symmetrize(G + T(theta));
    const double update = norm_inf(next - theta);
    if (update <= opt.tol) {
      sol.Theta = std::move(next);
      sol.iterations = k + 1;
      return sol;
    }
    if (!std::isfinite(update) || update > 10.0 * min_update) {
      throw ConvergenceError("solve_theta: fixed-point iteration diverges (update grew to " +
                             std::to_string(update) + ")");
    }
    min_update = std::min(min_update, update);
    theta = std::move(next);
  }
  throw ConvergenceError("solve_theta: fixed-point iteration did not converge in " +
                         std::to_string(opt.max_iterations) + " iterations");
}

}  // namespace

ThetaSolution solve_theta(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& G,
                          const ThetaOptions& options) {
  if (G.rows() != sys.n() || G.cols() != sys.n()) throw DimensionError("solve_theta: G must be n x n");
  const MatrixXd Gs = symmetrize(G);
  const NoiseOperator T(sys);
  ThetaSolution sol = options.method == ThetaMethod::Direct ? solve_direct(T, Gs)
                                                            : solve_fixed_point(T, Gs, options);
  fill_residuals(T, Gs, sol);
  const double bound = options.tol * std::max(1.0, norm_inf(sol.Theta));
  if (!(sol.residual_eq4 <= bound) || !(sol.residual_gramian <= bound)) {
    throw NumericalError("solve_theta: residuals (" + std::to_string(sol.residual_eq4) + ", " +
                         std::to_string(sol.residual_gramian) + ") exceed tolerance");
  }
  return sol;
}

const char* to_string(ThetaMethod m) { return m == ThetaMethod::Direct ? "Direct" : "FixedPoint"; }

}  // namespace stochlq
