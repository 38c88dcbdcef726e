#include "skf/sparsify.hpp"

#include <cmath>
#include <stdexcept>

namespace skf {

namespace {

std::vector<std::size_t> small_set(const Vector& x, double lambda) {
  std::vector<std::size_t> s;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) < lambda) s.push_back(static_cast<std::size_t>(i));
  return s;
}

}  // namespace

Vector condition_on_zeros(const Vector& mean, const Matrix& cov, const std::vector<std::size_t>& zero_set) {
  const Eigen::Index p = mean.size();
  if (cov.rows() != p || cov.cols() != p) throw std::invalid_argument("condition_on_zeros: dimension mismatch");
  if (zero_set.empty()) return mean;
  if (static_cast<Eigen::Index>(zero_set.size()) == p) return Vector::Zero(p);

  const auto ns = static_cast<Eigen::Index>(zero_set.size());
  Matrix p_ss(ns, ns);
  Vector m_s(ns);
  for (Eigen::Index a = 0; a < ns; ++a) {
    const auto i = static_cast<Eigen::Index>(zero_set[static_cast<std::size_t>(a)]);
    m_s(a) = mean(i);
    for (Eigen::Index b = 0; b < ns; ++b) p_ss(a, b) = cov(i, static_cast<Eigen::Index>(zero_set[static_cast<std::size_t>(b)]));
  }
  const Vector w = spd_solve(p_ss, m_s);

  Vector out = mean;
  for (Eigen::Index a = 0; a < ns; ++a) {
    const auto j = static_cast<Eigen::Index>(zero_set[static_cast<std::size_t>(a)]);
    out.noalias() -= cov.col(j) * w(a);
  }
  for (std::size_t i : zero_set) out(static_cast<Eigen::Index>(i)) = 0.0;
  return out;
}

SparseEstimate sparsify(const Vector& mean, const Matrix& cov, double lambda, int max_iter) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("sparsify: lambda must be >= 0");
  if (max_iter < 1) throw std::invalid_argument("sparsify: max_iter must be >= 1");

  SparseEstimate est;
  est.coefficients = mean;
  bool have_previous = false;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<std::size_t> s = small_set(est.coefficients, lambda);
    if (have_previous && s == est.zero_set) {
      est.converged = true;
      break;
    }
    est.coefficients = condition_on_zeros(mean, cov, s);
    est.zero_set = std::move(s);
    have_previous = true;
    ++est.iterations;
  }
  if (!est.converged) est.converged = small_set(est.coefficients, lambda) == est.zero_set;
  return est;
}

}  // namespace skf
