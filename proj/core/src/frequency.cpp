#include "stochlq/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "stochlq/errors.hpp"

namespace stochlq {

using cd = std::complex<double>;

double hermitian_form_F(const Eigen::Ref<const MatrixXd>& Theta, const Eigen::Ref<const MatrixXd>& Gamma,
                        const Eigen::Ref<const VectorXcd>& x, const Eigen::Ref<const VectorXcd>& u) {
  if (Theta.rows() != x.size() || Theta.cols() != x.size() || Gamma.rows() != u.size() ||
      Gamma.cols() != u.size()) {
    throw DimensionError("hermitian_form_F: dimension mismatch");
  }
  const cd value = x.dot(Theta.cast<cd>() * x) + u.dot(Gamma.cast<cd>() * u);
  const double scale = std::max(1.0, norm_inf(Theta) * x.squaredNorm() + norm_inf(Gamma) * u.squaredNorm());
  if (std::abs(value.imag()) > 1e-12 * scale) {
    throw InvariantError("hermitian_form_F: imaginary part is not negligible (weights not symmetric?)");
  }
  return value.real();
}

namespace {

MatrixXcd hermitian_part(const MatrixXcd& M) { return 0.5 * (M + M.adjoint()); }

MatrixXcd assemble_pi(const MatrixXcd& Z, const MatrixXd& Theta, const MatrixXd& Gamma) {
  const MatrixXcd P = Z.adjoint() * Theta.cast<cd>() * Z + Gamma.cast<cd>();
  const double scale = std::max(1.0, norm_inf(P));
  if (norm_inf(MatrixXcd(P - P.adjoint())) > 1e-12 * scale) {
    throw InvariantError("pi_matrix: result is not Hermitian");
  }
  return hermitian_part(P);
}

}  // namespace

MatrixXcd pi_matrix(const SystemModel& sys, const Eigen::Ref<const MatrixXd>& Theta,
                    const Eigen::Ref<const MatrixXd>& Gamma, double lambda) {
  if (Theta.rows() != sys.n() || Gamma.rows() != sys.m()) throw DimensionError("pi_matrix: dimension mismatch");
  const MatrixXcd Z = TransferFunction(sys.A()).apply(lambda, sys.b());
  if (!Z.allFinite()) throw NumericalError("pi_matrix: (i*lambda*I - A) is singular");
  return assemble_pi(Z, Theta, Gamma);
}

MatrixXcd pi_matrix(const SystemModel& sys, const ThetaSolution& theta, const Eigen::Ref<const MatrixXd>& Gamma,
                    double lambda) {
  return pi_matrix(sys, theta.Theta, Gamma, lambda);
}

// --------------------------------------------------------------------------

namespace {

struct Sample {
  double lambda;
  double value;   // λ_min(Π(λ))
  MatrixXcd pi;   // Π(λ)
  MatrixXcd dpi;  // dΠ/dλ
  double sigma;   // σ_min(iλI − A)
};

class PiScanner {
 public:
  PiScanner(const SystemModel& sys, const MatrixXd& Theta, const MatrixXd& Gamma)
      : sys_(sys), Theta_(Theta.cast<cd>()), Gamma_(Gamma) {
    theta_b2_ = norm_2(Theta) * std::pow(norm_2(sys.b()), 2);
  }

  Sample sample(double lambda) {
    ++evaluations;
    MatrixXcd R = -sys_.A().cast<cd>();
    R.diagonal().array() += cd(0.0, lambda);
    const auto lu = R.partialPivLu();
    const MatrixXcd Z = lu.solve(sys_.b().cast<cd>());
    // g' = −i g², so Z' = −i g Z.
    const MatrixXcd dZ = cd(0.0, -1.0) * lu.solve(Z);
    Sample s;
    s.lambda = lambda;
    s.pi = hermitian_part(Z.adjoint() * Theta_ * Z + Gamma_.cast<cd>());
    s.dpi = hermitian_part(dZ.adjoint() * Theta_ * Z + Z.adjoint() * Theta_ * dZ);
    s.value = min_eigenvalue(s.pi);
    Eigen::JacobiSVD<MatrixXcd> svd(R);
    s.sigma = svd.singularValues()(svd.singularValues().size() - 1);
    if (!s.pi.allFinite() || !(s.sigma > 0.0)) {
      throw NumericalError("check_frequency_condition: i*lambda is an eigenvalue of A");
    }
    return s;
  }

  /// Lower bound of λ_min(Π) over [l.lambda, r.lambda].
  double interval_bound(const Sample& l, const Sample& r) const {
    const double w = r.lambda - l.lambda;
    const double half = 0.5 * w;
    const double sigma_floor = 0.5 * (l.sigma + r.sigma - w);
    if (!(sigma_floor > 0.0)) return -std::numeric_limits<double>::infinity();
    const double g_sup = 1.0 / sigma_floor;
    const double remainder = 0.5 * 6.0 * theta_b2_ * std::pow(g_sup, 4) * half * half;
    const double left = std::min(l.value, min_eigenvalue(MatrixXcd(l.pi + half * l.dpi)));
    const double right = std::min(r.value, min_eigenvalue(MatrixXcd(r.pi - half * r.dpi)));
    return std::min(left, right) - remainder;
  }

  double theta_b2() const { return theta_b2_; }

  std::size_t evaluations = 0;

 private:
  const SystemModel& sys_;
  MatrixXcd Theta_;
  MatrixXd Gamma_;
  double theta_b2_ = 0.0;
};

struct Interval {
  double bound;
  std::size_t left;   // indices into the sample store
  std::size_t right;
};

struct BoundGreater {
  bool operator()(const Interval& a, const Interval& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.left > b.left;
  }
};

}  // namespace

FrequencyReport check_frequency_condition(const SystemModel& sys, const ThetaSolution& theta,
                                          const Eigen::Ref<const MatrixXd>& Gamma,
                                          const FrequencyOptions& options) {
  if (theta.Theta.rows() != sys.n() || Gamma.rows() != sys.m() || Gamma.cols() != sys.m()) {
    throw DimensionError("check_frequency_condition: dimension mismatch");
  }
  if (!(options.tol > 0.0)) throw InputError("check_frequency_condition: tol must be positive");
  const double tol = options.tol;
  const double allowance = 0.1 * tol;

  PiScanner scan(sys, theta.Theta, MatrixXd(Gamma));
  const double a_norm = norm_2(sys.A());
  const double unit = 1.0 + a_norm;

  FrequencyReport report;
  report.tol = tol;
  report.lambda_max = std::max(10.0 * unit, a_norm + std::sqrt(scan.theta_b2() / allowance));
  report.tail_bound = scan.theta_b2() / std::pow(report.lambda_max - a_norm, 2);

  const double gamma_min = min_eigenvalue(MatrixXd(Gamma));
  const double tail_lower = gamma_min - report.tail_bound;

  // Initial grid: fine near the spectrum of A, geometric beyond.
  std::vector<double> grid;
  for (int k = 0; k <= 64; ++k) grid.push_back(4.0 * unit * k / 64.0);
  for (double lam = grid.back() * 1.25; lam < report.lambda_max; lam *= 1.25) grid.push_back(lam);
  grid.push_back(report.lambda_max);

  std::vector<Sample> samples;
  samples.reserve(4096);
  double best = gamma_min;
  double argmin = std::numeric_limits<double>::infinity();
  auto add_sample = [&](double lam) {
    samples.push_back(scan.sample(lam));
    if (samples.back().value < best) {
      best = samples.back().value;
      argmin = lam;
    }
    return samples.size() - 1;
  };

  std::priority_queue<Interval, std::vector<Interval>, BoundGreater> queue;
  std::size_t prev = add_sample(grid.front());
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const std::size_t cur = add_sample(grid[k]);
    queue.push({scan.interval_bound(samples[prev], samples[cur]), prev, cur});
    prev = cur;
  }

  while (queue.top().bound < best - allowance) {
    if (scan.evaluations >= options.max_evaluations) {
      throw ConvergenceError("check_frequency_condition: refinement budget exhausted (" +
                             std::to_string(scan.evaluations) + " evaluations)");
    }
    const Interval iv = queue.top();
    queue.pop();
    const double mid = 0.5 * (samples[iv.left].lambda + samples[iv.right].lambda);
    const std::size_t m = add_sample(mid);
    queue.push({scan.interval_bound(samples[iv.left], samples[m]), iv.left, m});
    queue.push({scan.interval_bound(samples[m], samples[iv.right]), m, iv.right});
  }

  report.delta_hat = std::min(queue.top().bound, tail_lower);
  report.min_observed = best;
  report.lambda_argmin = argmin;
  report.grid_points = samples.size();
  if (report.delta_hat > tol) {
    report.verdict = FrequencyVerdict::StrictlyPositive;
  } else if (report.delta_hat >= -tol) {
    report.verdict = FrequencyVerdict::NonnegativeOnly;
  } else {
    report.verdict = FrequencyVerdict::Fails;
  }
  return report;
}

const char* to_string(FrequencyVerdict v) {
  switch (v) {
    case FrequencyVerdict::StrictlyPositive: return "StrictlyPositive";
    case FrequencyVerdict::NonnegativeOnly: return "NonnegativeOnly";
    case FrequencyVerdict::Fails: return "Fails";
  }
  return "?";
}

}  // namespace stochlq
