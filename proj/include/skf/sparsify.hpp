#pragma once

#include <cstddef>
#include <vector>

#include "skf/linalg.hpp"

namespace skf {

/// Sparse point estimate derived from a Gaussian posterior N(mean, cov).
struct SparseEstimate {
  Vector coefficients;
  std::vector<std::size_t> zero_set;  // ascending; coefficients there are exactly 0
  int iterations = 0;                 // conditioning passes performed
  bool converged = false;
};

/// Conditional mean of N(mean, cov) given x_i = 0 for i in zero_set:
///   mean - cov(:, S) cov(S, S)^-1 mean(S),
/// with the S entries set to exactly zero. A singular cov(S, S) is handled by
/// the pseudoinverse.
Vector condition_on_zeros(const Vector& mean, const Matrix& cov, const std::vector<std::size_t>& zero_set);

/// Repeats "S = {i : |x_i| < lambda}; x = condition_on_zeros(mean, cov, S)"
/// starting from x = mean until S stops changing. Every pass conditions the
/// original mean. Empty S returns the mean unchanged, S covering every index
/// returns zero.
SparseEstimate sparsify(const Vector& mean, const Matrix& cov, double lambda, int max_iter = 20);

}  // namespace skf
