#pragma once

#include <optional>

#include "skf/basis.hpp"
#include "skf/sparsify.hpp"

namespace skf {

/// Running one-step-ahead prediction error sums.
struct ScoreAccumulator {
  double sum_raw = 0.0;       // sum e_t^2
  double sum_sparse = 0.0;    // sum (y_t - theta_t A xi_sparse_{t-1})^2, from t = 2
  double sum_weighted = 0.0;  // sum e_t^2 / V_t + ln V_t, where V_t is defined
  long count_raw = 0;
  long count_sparse = 0;
  long count_weighted = 0;

  // Averages are +inf while nothing has been accumulated.
  double avg_raw() const;
  double avg_sparse() const;
  double avg_weighted() const;
};

ScoreAccumulator update_scores(ScoreAccumulator acc, double innovation, std::optional<double> innovation_var,
                               std::optional<double> sparse_error);

/// theta_t * A * prev.coefficients.
double sparse_one_step_prediction(const Vector& row, const Matrix& transition, const SparseEstimate& prev);
double sparse_one_step_prediction(const RegressorRow& row, const Matrix& transition, const SparseEstimate& prev);

}  // namespace skf
