#pragma once

#include <Eigen/Dense>

namespace stochlq {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Induced infinity norm (maximum absolute row sum).
double norm_inf(const Eigen::Ref<const MatrixXd>& M);
double norm_inf(const Eigen::Ref<const MatrixXcd>& M);

/// Spectral norm (largest singular value).
double norm_2(const Eigen::Ref<const MatrixXd>& M);

/// (M + Mᵀ)/2. The result is exactly symmetric.
MatrixXd symmetrize(const Eigen::Ref<const MatrixXd>& M);

/// Largest real part over the spectrum of a square matrix.
/// Throws NumericalError if the eigenvalue iteration does not converge.
double spectral_abscissa(const Eigen::Ref<const MatrixXd>& M);

/// Smallest eigenvalue of a symmetric matrix (only the lower triangle is read).
double min_eigenvalue(const Eigen::Ref<const MatrixXd>& S);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const Eigen::Ref<const MatrixXcd>& H);

bool all_finite(const Eigen::Ref<const MatrixXd>& M);

/// Kronecker product A ⊗ B.
MatrixXd kron(const Eigen::Ref<const MatrixXd>& A, const Eigen::Ref<const MatrixXd>& B);

/// Coordinates of a symmetric n×n matrix in the basis {E_kk} ∪ {E_kl + E_lk, k<l},
/// i.e. its upper triangle read row by row. Length n(n+1)/2.
VectorXd sym_vec(const Eigen::Ref<const MatrixXd>& S);

/// Inverse of sym_vec.
MatrixXd sym_unvec(const Eigen::Ref<const VectorXd>& v, Eigen::Index n);

/// Basis element with sym_vec coordinate `index` equal to one.
MatrixXd sym_basis(Eigen::Index index, Eigen::Index n);

}  // namespace stochlq
