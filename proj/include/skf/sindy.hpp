#pragma once

#include <cstddef>
#include <vector>

#include "skf/linalg.hpp"

namespace skf {

/// Result of sequentially thresholded least squares.
struct SparseSolution {
  Vector coefficients;
  std::vector<std::size_t> support;  // indices with nonzero coefficient, ascending
  int iterations = 0;
  bool converged = false;
};

/// Minimum-norm least squares solution of theta * xi ~= y. Singular values
/// below 1e-12 times the largest are treated as zero.
Vector least_squares(const Matrix& theta, const Vector& y);

/// Batch SINDy: least squares, then alternate "zero every |xi_i| < lambda"
/// and "refit on the remaining columns" until the set of small indices stops
/// changing or max_iter refits have been done. Coefficients exactly equal to
/// lambda are kept.
SparseSolution stls(const Matrix& theta, const Vector& y, double lambda, int max_iter = 20);

}  // namespace skf
