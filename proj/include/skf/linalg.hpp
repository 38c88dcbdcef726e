#pragma once

#include <Eigen/Dense>

namespace skf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Symmetric positive (semi)definite helpers.
//
// Monomial libraries produce Gram and covariance matrices whose diagonal
// spans many orders of magnitude (a degree-4 Lorenz library easily reaches
// 1e16 between its smallest and largest column norms). All rank decisions
// and inversions below are therefore carried out on the Jacobi-equilibrated
// matrix D^-1/2 M D^-1/2, which is unit-diagonal, and mapped back.

/// Relative eigenvalue cutoff on the equilibrated matrix below which a
/// symmetric matrix is treated as rank deficient.
inline constexpr double kEquilibratedRankTol = 1e-10;

/// Relative cutoff used by plain Moore-Penrose pseudoinverses.
inline constexpr double kPinvCutoff = 1e-12;

/// Overwrites m with (m + m^T) / 2 so that m(i,j) == m(j,i) bit for bit.
void symmetrize(Matrix& m);

/// True when the equilibrated spectrum of the symmetric PSD matrix m has
/// min/max eigenvalue ratio above tol. Any zero diagonal entry means false.
bool equilibrated_full_rank(const Matrix& m, double tol = kEquilibratedRankTol);

/// Minimum eigenvalue ratio of the equilibrated matrix (0 if a diagonal
/// entry vanishes).
double equilibrated_min_ratio(const Matrix& m);

/// Inverse of a symmetric positive definite matrix through the equilibrated
/// LDLT factorisation. Falls back to the equilibrated pseudoinverse when the
/// factorisation is not numerically definite.
Matrix spd_inverse(const Matrix& m);

/// Solves m x = b for symmetric PSD m; singular systems are resolved with
/// the pseudoinverse of the equilibrated matrix.
Vector spd_solve(const Matrix& m, const Vector& b);

/// Moore-Penrose pseudoinverse of a symmetric matrix, eigenvalues below
/// rel_cutoff * max|eigenvalue| dropped.
Matrix symmetric_pinv(const Matrix& m, double rel_cutoff = kPinvCutoff);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& m);

}  // namespace skf
