#include "skf/sindy.hpp"

#include <cmath>
#include <stdexcept>

namespace skf {

namespace {

std::vector<bool> small_mask(const Vector& xi, double lambda) {
  std::vector<bool> mask(static_cast<std::size_t>(xi.size()));
  for (Eigen::Index i = 0; i < xi.size(); ++i) mask[static_cast<std::size_t>(i)] = std::abs(xi(i)) < lambda;
  return mask;
}

}  // namespace

Vector least_squares(const Matrix& theta, const Vector& y) {
  if (theta.rows() != y.size()) throw std::invalid_argument("least_squares: rows(theta) != length(y)");
  if (!theta.allFinite() || !y.allFinite()) throw std::invalid_argument("least_squares: non-finite input");
  if (theta.cols() == 0) return Vector(0);
  if (theta.rows() == 0) return Vector::Zero(theta.cols());
  Eigen::BDCSVD<Matrix> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kPinvCutoff);
  return svd.solve(y);
}

SparseSolution stls(const Matrix& theta, const Vector& y, double lambda, int max_iter) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("stls: lambda must be >= 0");
  if (max_iter < 1) throw std::invalid_argument("stls: max_iter must be >= 1");

  const Eigen::Index p = theta.cols();
  SparseSolution sol;
  sol.coefficients = least_squares(theta, y);

  std::vector<bool> previous;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<bool> small = small_mask(sol.coefficients, lambda);
    if (!previous.empty() && small == previous) {
      sol.converged = true;
      break;
    }
    std::vector<Eigen::Index> big;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (small[static_cast<std::size_t>(i)]) {
        sol.coefficients(i) = 0.0;
      } else {
        big.push_back(i);
      }
    }
    if (!big.empty()) {
      Matrix reduced(theta.rows(), static_cast<Eigen::Index>(big.size()));
      for (std::size_t k = 0; k < big.size(); ++k) reduced.col(static_cast<Eigen::Index>(k)) = theta.col(big[k]);
      const Vector refit = least_squares(reduced, y);
      for (std::size_t k = 0; k < big.size(); ++k) sol.coefficients(big[k]) = refit(static_cast<Eigen::Index>(k));
    }
    previous = std::move(small);
    ++sol.iterations;
  }
  if (!sol.converged) sol.converged = small_mask(sol.coefficients, lambda) == previous;

  for (Eigen::Index i = 0; i < p; ++i) {
    if (sol.coefficients(i) != 0.0) sol.support.push_back(static_cast<std::size_t>(i));
  }
  return sol;
}

}  // namespace skf
