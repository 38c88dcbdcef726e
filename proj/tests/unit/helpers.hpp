#pragma once

#include <random>
#include <vector>

#include "skf/engine.hpp"
#include "skf/linalg.hpp"

namespace skf::test {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n) { return random_matrix(rng, n, 1).col(0); }

inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n) {
  const Matrix a = random_matrix(rng, n, n);
  return a * a.transpose() + 0.1 * Matrix::Identity(n, n);
}

inline Stream to_stream(const Matrix& theta, const Vector& y) {
  Stream s;
  for (Eigen::Index k = 0; k < theta.rows(); ++k) s.push_back({{theta.row(k).transpose(), static_cast<long>(k)}, y(k)});
  return s;
}

inline double rel_diff(const Vector& a, const Vector& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale > 0.0 ? (a - b).norm() / scale : 0.0;
}

}  // namespace skf::test
