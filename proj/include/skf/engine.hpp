#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "skf/basis.hpp"
#include "skf/filter.hpp"
#include "skf/scores.hpp"
#include "skf/sparsify.hpp"

namespace skf {

/// One measurement of the identified equation.
struct Sample {
  RegressorRow row;
  double y = 0.0;
};

using Stream = std::vector<Sample>;

/// Worst-case numerical health of a run.
struct NumericalDiagnostics {
  double max_asymmetry = 0.0;                                        // max |P - P^T|
  double min_eig_over_trace = std::numeric_limits<double>::infinity();  // min eig(P) / trace(P)
  double min_var_margin = std::numeric_limits<double>::infinity();      // min (V_t - eta^2)
  long checked_steps = 0;

  void merge(const NumericalDiagnostics& other);
};

/// Per-step record of a run, filled only when recording is enabled.
struct Trajectory {
  std::vector<double> innovation;
  std::vector<std::optional<double>> innovation_var;
  std::vector<Vector> mean_filt;
  std::vector<std::vector<Vector>> sparse;  // [lambda index][step]
};

struct EngineOptions {
  int sparsify_max_iter = 20;
  bool record = false;
  bool check_numerics = false;  // eigen-decomposes P_{t|t} every step
};

/// One Kalman recursion over the coefficient vector with a sparsified
/// estimate and prediction scores per threshold. The thresholds never feed
/// back into the recursion, so any number of them can share it.
class SindyKalmanFilter {
 public:
  SindyKalmanFilter(FilterModel model, std::vector<double> lambdas, EngineOptions options = {});

  StepOutput step(const RegressorRow& row, double y);
  void run(std::span<const Sample> stream);

  /// Swaps in a model of the same dimension; the filter state is kept.
  void set_model(FilterModel model);
  /// Exact re-initialisation of the prediction, as at a switch instant.
  void reset_prior();
  const FilterModel& model() const { return model_; }
  const FilterState& state() const { return state_; }
  const std::vector<double>& lambdas() const { return lambdas_; }
  const std::vector<ScoreAccumulator>& scores() const { return scores_; }
  /// Latest sparse estimate per threshold; empty coefficients before the first step.
  const std::vector<SparseEstimate>& sparse() const { return sparse_; }
  const Trajectory& trajectory() const { return trajectory_; }
  const NumericalDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  void check_numerics(const StepOutput& out);

  FilterModel model_;
  std::vector<double> lambdas_;
  EngineOptions options_;
  FilterState state_;
  std::vector<ScoreAccumulator> scores_;
  std::vector<SparseEstimate> sparse_;
  bool have_sparse_ = false;
  Trajectory trajectory_;
  NumericalDiagnostics diagnostics_;
};

}  // namespace skf
