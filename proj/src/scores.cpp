#include "skf/scores.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace skf {

namespace {

double average(double sum, long count) {
  return count > 0 ? sum / static_cast<double>(count) : std::numeric_limits<double>::infinity();
}

}  // namespace

double ScoreAccumulator::avg_raw() const { return average(sum_raw, count_raw); }
double ScoreAccumulator::avg_sparse() const { return average(sum_sparse, count_sparse); }
double ScoreAccumulator::avg_weighted() const { return average(sum_weighted, count_weighted); }

ScoreAccumulator update_scores(ScoreAccumulator acc, double innovation, std::optional<double> innovation_var,
                               std::optional<double> sparse_error) {
  acc.sum_raw += innovation * innovation;
  ++acc.count_raw;
  if (sparse_error) {
    acc.sum_sparse += *sparse_error * *sparse_error;
    ++acc.count_sparse;
  }
  if (innovation_var) {
    if (!(*innovation_var > 0.0)) throw std::invalid_argument("update_scores: innovation variance must be > 0");
    acc.sum_weighted += innovation * innovation / *innovation_var + std::log(*innovation_var);
    ++acc.count_weighted;
  }
  return acc;
}

double sparse_one_step_prediction(const Vector& row, const Matrix& transition, const SparseEstimate& prev) {
  const Eigen::Index p = prev.coefficients.size();
  if (row.size() != p || transition.rows() != p || transition.cols() != p)
    throw std::invalid_argument("sparse_one_step_prediction: dimension mismatch");
  if (transition.isIdentity(0.0)) return row.dot(prev.coefficients);
  return row.dot(transition * prev.coefficients);
}

double sparse_one_step_prediction(const RegressorRow& row, const Matrix& transition, const SparseEstimate& prev) {
  return sparse_one_step_prediction(row.values, transition, prev);
}

}  // namespace skf
