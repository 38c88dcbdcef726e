#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "skf/linalg.hpp"

namespace skf {

/// Gaussian prior with a proper covariance.
struct InformativePrior {
  Matrix covariance;
};

/// Infinite prior variance, propagated exactly in information form.
struct NonInformativePrior {};

/// P = gamma * I with a large finite gamma. Kept to cross-check the exact
/// non-informative recursion; always propagated in information form since
/// the covariance form cannot resolve gamma against tiny posterior variances.
struct DiffusePrior {
  double gamma = 1e8;
};

using Prior = std::variant<InformativePrior, NonInformativePrior, DiffusePrior>;

/// How a designated switch instant is applied to the parameter model.
enum class SwitchHandling {
  exact_reset,  // information matrix <- 0 (non-informative re-initialisation)
  large_gamma,  // Q_t += gamma * I
};

/// Process noise used in the time update from step t to t + 1.
struct ProcessStep {
  const Matrix* covariance = nullptr;  // nullptr means Q_t = 0
  double impulse = 0.0;                // added to the diagonal of Q_t
  bool reset = false;                  // exact non-informative re-initialisation
};

/// Schedule of process covariances Q_t, optionally with switch instants.
///
/// Switch instants are sample indices s: the parameters generating sample s
/// belong to the new regime, so the jump is applied in the time update that
/// follows sample s - 1.
class ProcessNoise {
 public:
  ProcessNoise() = default;

  static ProcessNoise zero() { return {}; }
  static ProcessNoise constant(Matrix q);
  /// Independent random walks of common variance on the listed coordinates.
  static ProcessNoise random_walk(std::size_t dim, const std::vector<std::size_t>& indices, double variance);

  ProcessNoise& set_switches(std::vector<long> instants, SwitchHandling handling = SwitchHandling::exact_reset,
                             double gamma = 1e8);

  ProcessStep at(long t) const;

  bool is_zero() const { return !base_.has_value() && switches_.empty(); }
  const std::optional<Matrix>& base() const { return base_; }
  const std::vector<long>& switches() const { return switches_; }
  SwitchHandling handling() const { return handling_; }
  double gamma() const { return gamma_; }

 private:
  std::optional<Matrix> base_;
  std::vector<long> switches_;  // sorted
  SwitchHandling handling_ = SwitchHandling::exact_reset;
  double gamma_ = 1e8;
};

/// Stochastic model for the coefficient vector:
///   xi_{t+1} = A xi_t + w_t,  y_t = theta_t xi_t + e_t,  var(e_t) = noise_var.
struct FilterModel {
  Matrix transition;
  ProcessNoise process;
  Vector prior_mean;
  Prior prior = NonInformativePrior{};
  double noise_var = 1.0;
  /// Equilibrated eigenvalue ratio above which the information matrix
  /// counts as full rank (switch to covariance form).
  double rank_tol = kEquilibratedRankTol;

  std::size_t dim() const { return static_cast<std::size_t>(transition.rows()); }

  /// Throws std::invalid_argument when dimensions or covariances are
  /// inconsistent.
  void validate() const;

  /// A = I, Q = 0, zero prior mean.
  static FilterModel time_invariant(std::size_t dim, Prior prior = NonInformativePrior{}, double noise_var = 1.0);
};

enum class FilterMode { covariance, information };

/// Filter state after t processed measurements.
///
/// In covariance mode the prediction is (mean_pred, cov_pred). In information
/// mode it is (info_pred, info_vec_pred) with info_vec_pred = info_pred *
/// mean, and mean_pred holds the corresponding (pseudoinverse) mean.
struct FilterState {
  FilterMode mode = FilterMode::covariance;
  bool diffuse = false;  // large-gamma cross-check run: stays in information form

  Vector mean_pred;
  Matrix cov_pred;
  Matrix info_pred;
  Vector info_vec_pred;

  Vector mean_filt;
  Matrix cov_filt;

  long t = 0;
  long rows_since_reset = 0;
};

struct StepOutput {
  double innovation = 0.0;
  std::optional<double> innovation_var;  // absent while the information matrix is singular
};

/// Raised when the innovation variance is not positive or the state turns
/// non-finite.
class FilterDivergence : public std::runtime_error {
 public:
  FilterDivergence(long step, const std::string& what)
      : std::runtime_error("filter diverged at step " + std::to_string(step) + ": " + what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

FilterState init(const FilterModel& model);

/// Discards the current prediction and restarts from the non-informative
/// prior (I / gamma for a diffuse model), as an exact reset does.
void reset(FilterState& state, const FilterModel& model);

/// Measurement update with (row, y) followed by the time update with q.
StepOutput step(FilterState& state, const FilterModel& model, const Vector& row, double y, const ProcessStep& q);

/// Convenience overload taking Q_t from model.process.at(state.t).
StepOutput step(FilterState& state, const FilterModel& model, const Vector& row, double y);

}  // namespace skf
