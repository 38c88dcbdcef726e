#include "skf/engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace skf {

void NumericalDiagnostics::merge(const NumericalDiagnostics& other) {
  max_asymmetry = std::max(max_asymmetry, other.max_asymmetry);
  min_eig_over_trace = std::min(min_eig_over_trace, other.min_eig_over_trace);
  min_var_margin = std::min(min_var_margin, other.min_var_margin);
  checked_steps += other.checked_steps;
}

SindyKalmanFilter::SindyKalmanFilter(FilterModel model, std::vector<double> lambdas, EngineOptions options)
    : model_(std::move(model)), lambdas_(std::move(lambdas)), options_(options) {
  for (double l : lambdas_)
    if (!(l >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  state_ = init(model_);
  scores_.resize(lambdas_.size());
  sparse_.resize(lambdas_.size());
  if (options_.record) trajectory_.sparse.resize(lambdas_.size());
}

StepOutput SindyKalmanFilter::step(const RegressorRow& row, double y) {
  const std::size_t n = lambdas_.size();
  std::vector<std::optional<double>> sparse_err(n);
  if (have_sparse_) {
    for (std::size_t k = 0; k < n; ++k) sparse_err[k] = y - sparse_one_step_prediction(row, model_.transition, sparse_[k]);
  }

  const StepOutput out = skf::step(state_, model_, row.values, y);

  for (std::size_t k = 0; k < n; ++k) {
    scores_[k] = update_scores(scores_[k], out.innovation, out.innovation_var, sparse_err[k]);
    sparse_[k] = sparsify(state_.mean_filt, state_.cov_filt, lambdas_[k], options_.sparsify_max_iter);
  }
  have_sparse_ = true;

  if (options_.check_numerics) check_numerics(out);
  if (options_.record) {
    trajectory_.innovation.push_back(out.innovation);
    trajectory_.innovation_var.push_back(out.innovation_var);
    trajectory_.mean_filt.push_back(state_.mean_filt);
    for (std::size_t k = 0; k < n; ++k) trajectory_.sparse[k].push_back(sparse_[k].coefficients);
  }
  return out;
}

void SindyKalmanFilter::run(std::span<const Sample> stream) {
  for (const Sample& s : stream) step(s.row, s.y);
}

void SindyKalmanFilter::set_model(FilterModel model) {
  if (model.dim() != model_.dim()) throw std::invalid_argument("set_model: dimension mismatch");
  model.validate();
  model_ = std::move(model);
}

void SindyKalmanFilter::reset_prior() { reset(state_, model_); }

void SindyKalmanFilter::check_numerics(const StepOutput& out) {
  const Matrix& p = state_.cov_filt;
  diagnostics_.max_asymmetry = std::max(diagnostics_.max_asymmetry, (p - p.transpose()).cwiseAbs().maxCoeff());
  const double tr = p.trace();
  if (tr > 0.0) diagnostics_.min_eig_over_trace = std::min(diagnostics_.min_eig_over_trace, min_eigenvalue(p) / tr);
  if (out.innovation_var)
    diagnostics_.min_var_margin = std::min(diagnostics_.min_var_margin, *out.innovation_var - model_.noise_var);
  ++diagnostics_.checked_steps;
}

}  // namespace skf
