#include "stochlq/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "stochlq/errors.hpp"

namespace stochlq {

double norm_inf(const Eigen::Ref<const MatrixXd>& M) {
  if (M.size() == 0) return 0.0;
  return M.cwiseAbs().rowwise().sum().maxCoeff();
}

double norm_inf(const Eigen::Ref<const MatrixXcd>& M) {
  if (M.size() == 0) return 0.0;
  return M.cwiseAbs().rowwise().sum().maxCoeff();
}

double norm_2(const Eigen::Ref<const MatrixXd>& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  return svd.singularValues()(0);
}

MatrixXd symmetrize(const Eigen::Ref<const MatrixXd>& M) {
  MatrixXd S = 0.5 * (M + M.transpose());
  // Floating-point addition is commutative, but copy the upper triangle anyway
  // so the result does not depend on evaluation order.
  S.triangularView<Eigen::StrictlyLower>() = S.transpose().triangularView<Eigen::StrictlyLower>();
  return S;
}

double spectral_abscissa(const Eigen::Ref<const MatrixXd>& M) {
  if (M.rows() != M.cols()) throw DimensionError("spectral_abscissa: matrix is not square");
  Eigen::EigenSolver<MatrixXd> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("spectral_abscissa: eigenvalue computation did not converge");
  }
  return es.eigenvalues().real().maxCoeff();
}

double min_eigenvalue(const Eigen::Ref<const MatrixXd>& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("min_eigenvalue: symmetric eigensolver did not converge");
  }
  return es.eigenvalues()(0);
}

double min_eigenvalue(const Eigen::Ref<const MatrixXcd>& H) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("min_eigenvalue: Hermitian eigensolver did not converge");
  }
  return es.eigenvalues()(0);
}

bool all_finite(const Eigen::Ref<const MatrixXd>& M) { return M.allFinite(); }

MatrixXd kron(const Eigen::Ref<const MatrixXd>& A, const Eigen::Ref<const MatrixXd>& B) {
  MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return K;
}

VectorXd sym_vec(const Eigen::Ref<const MatrixXd>& S) {
  const Eigen::Index n = S.rows();
  VectorXd v(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) v(k++) = S(i, j);
  }
  return v;
}

MatrixXd sym_unvec(const Eigen::Ref<const VectorXd>& v, Eigen::Index n) {
  if (v.size() != n * (n + 1) / 2) throw DimensionError("sym_unvec: length is not n(n+1)/2");
  MatrixXd S(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      S(i, j) = v(k);
      S(j, i) = v(k);
      ++k;
    }
  }
  return S;
}

MatrixXd sym_basis(Eigen::Index index, Eigen::Index n) {
  VectorXd e = VectorXd::Zero(n * (n + 1) / 2);
  e(index) = 1.0;
  return sym_unvec(e, n);
}

}  // namespace stochlq
