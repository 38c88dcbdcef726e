#include "skf/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace skf {

namespace {

// Pivot ratio below which an LDLT factorisation of an equilibrated matrix
// is not trusted.
constexpr double kLdltPivotTol = 1e-13;

// Returns D^-1/2 (zero diagonal entries map to 1) as a vector.
Vector inverse_sqrt_diagonal(const Matrix& m) {
  Vector s(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = m(i, i);
    s(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
  }
  return s;
}

Matrix equilibrate(const Matrix& m, const Vector& s) {
  return s.asDiagonal() * m * s.asDiagonal();
}

}  // namespace

void symmetrize(Matrix& m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
}

double equilibrated_min_ratio(const Matrix& m) {
  if (m.rows() == 0) return 1.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!(m(i, i) > 0.0)) return 0.0;
  }
  const Matrix s = equilibrate(m, inverse_sqrt_diagonal(m));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double hi = ev(ev.size() - 1);
  if (!(hi > 0.0)) return 0.0;
  return ev(0) / hi;
}

bool equilibrated_full_rank(const Matrix& m, double tol) {
  if (m.rows() == 0) return true;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!(m(i, i) > 0.0)) return false;
  }
  // Cheap rejection: every LDLT pivot of the unit-diagonal matrix is a
  // diagonal entry of a Schur complement, so min pivot >= min eigenvalue
  // while max eigenvalue >= 1. A pivot at or below tol settles the answer.
  const Matrix eq = equilibrate(m, inverse_sqrt_diagonal(m));
  Eigen::LDLT<Matrix> ldlt(eq);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > tol)) return false;
  return equilibrated_min_ratio(m) > tol;
}

Matrix symmetric_pinv(const Matrix& m, double rel_cutoff) {
  const Eigen::Index n = m.rows();
  if (n == 0) return Matrix(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  const Vector& ev = eig.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return Matrix::Zero(n, n);
  Vector inv = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(ev(i)) > rel_cutoff * scale) inv(i) = 1.0 / ev(i);
  }
  const Matrix& u = eig.eigenvectors();
  Matrix out = u * inv.asDiagonal() * u.transpose();
  symmetrize(out);
  return out;
}

Matrix spd_inverse(const Matrix& m) {
  const Eigen::Index n = m.rows();
  if (n == 0) return Matrix(0, 0);
  const Vector s = inverse_sqrt_diagonal(m);
  const Matrix eq = equilibrate(m, s);
  Eigen::LDLT<Matrix> ldlt(eq);
  Matrix inner;
  const Vector d = ldlt.vectorD();
  if (ldlt.info() == Eigen::Success && d.minCoeff() > kLdltPivotTol * d.cwiseAbs().maxCoeff()) {
    inner = ldlt.solve(Matrix::Identity(n, n));
  } else {
    inner = symmetric_pinv(eq);
  }
  Matrix out = s.asDiagonal() * inner * s.asDiagonal();
  symmetrize(out);
  return out;
}

Vector spd_solve(const Matrix& m, const Vector& b) {
  const Eigen::Index n = m.rows();
  if (n == 0) return Vector(0);
  const Vector s = inverse_sqrt_diagonal(m);
  const Matrix eq = equilibrate(m, s);
  const Vector rhs = s.cwiseProduct(b);
  Eigen::LDLT<Matrix> ldlt(eq);
  const Vector d = ldlt.vectorD();
  if (ldlt.info() == Eigen::Success && d.minCoeff() > kLdltPivotTol * d.cwiseAbs().maxCoeff()) {
    return s.cwiseProduct(ldlt.solve(rhs));
  }
  return s.cwiseProduct(symmetric_pinv(eq) * rhs);
}

double min_eigenvalue(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

}  // namespace skf
