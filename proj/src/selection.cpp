#include "skf/selection.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <stdexcept>

namespace skf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double candidate_score(CandidateKind kind, ScoreKind score, const ScoreAccumulator& acc) {
  if (score == ScoreKind::automatic) score = kind == CandidateKind::lambda ? ScoreKind::sparse : ScoreKind::raw;
  switch (score) {
    case ScoreKind::sparse:
      return acc.avg_sparse();
    case ScoreKind::weighted:
      return acc.avg_weighted();
    default:
      return acc.avg_raw();
  }
}

EngineOptions engine_options(const BankOptions& options) {
  EngineOptions eo;
  eo.sparsify_max_iter = options.sparsify_max_iter;
  eo.check_numerics = options.check_numerics;
  return eo;
}

// Advances a candidate filter from sample `start` to the end of the stream.
CandidateResult finish_candidate(double value, CandidateKind kind, SindyKalmanFilter skf, std::vector<double> profile,
                                 std::span<const Sample> stream, std::size_t start, const BankOptions& options) {
  CandidateResult r;
  r.value = value;
  r.profile = std::move(profile);
  if (options.record_profiles) r.profile.reserve(stream.size());
  try {
    for (std::size_t t = start; t < stream.size(); ++t) {
      skf.step(stream[t].row, stream[t].y);
      if (options.record_profiles) r.profile.push_back(candidate_score(kind, options.score, skf.scores()[0]));
    }
    r.scores = skf.scores()[0];
    r.avg_score = candidate_score(kind, options.score, r.scores);
    r.final_sparse = skf.sparse()[0];
    r.final_mean = skf.state().mean_filt;
  } catch (const FilterDivergence& e) {
    r.aborted = true;
    r.error = e.what();
    r.avg_score = kInf;
    if (options.record_profiles) r.profile.resize(stream.size(), kInf);
  }
  r.diagnostics = skf.diagnostics();
  return r;
}

CandidateResult run_candidate(const FilterModel& base, const CandidateGrid& grid, std::size_t i, double lambda,
                              std::span<const Sample> stream, const BankOptions& options) {
  const double value = grid.values[i];
  const double threshold = grid.kind == CandidateKind::lambda ? value : lambda;
  SindyKalmanFilter skf(candidate_model(base, grid.kind, value, options), {threshold}, engine_options(options));
  return finish_candidate(value, grid.kind, std::move(skf), {}, stream, 0, options);
}

CandidateResult aborted_candidate(double value, const std::string& what, std::size_t steps, const BankOptions& options) {
  CandidateResult r;
  r.value = value;
  r.aborted = true;
  r.error = what;
  r.avg_score = kInf;
  if (options.record_profiles) r.profile.assign(steps, kInf);
  return r;
}

// Switch candidates agree with the no-switch filter up to their instant, so
// that prefix is computed once and each candidate forks from a copy.
std::vector<CandidateResult> run_switch_candidates(const FilterModel& base, const CandidateGrid& grid, double lambda,
                                                   std::span<const Sample> stream, const BankOptions& options) {
  const std::size_t n = stream.size();
  const std::size_t k = grid.values.size();
  std::vector<std::size_t> fork_at(k);
  for (std::size_t i = 0; i < k; ++i) {
    const long s = std::lround(grid.values[i]);
    fork_at[i] = static_cast<std::size_t>(std::clamp(s, 0L, static_cast<long>(n)));
  }

  FilterModel trunk_model = base;
  trunk_model.process = base.process.base() ? ProcessNoise::constant(*base.process.base()) : ProcessNoise::zero();
  SindyKalmanFilter trunk(trunk_model, {lambda}, engine_options(options));
  std::vector<double> trunk_profile;
  std::vector<std::optional<SindyKalmanFilter>> forks(k);
  std::vector<std::vector<double>> prefixes(k);
  std::string trunk_error;
  std::size_t next = 0;  // grid values are increasing, so fork points are too
  for (std::size_t t = 0; t <= n; ++t) {
    for (; next < k && fork_at[next] == t; ++next) {
      forks[next] = trunk;
      if (options.record_profiles) prefixes[next] = trunk_profile;
    }
    if (t == n || next == k) break;
    try {
      trunk.step(stream[t].row, stream[t].y);
    } catch (const FilterDivergence& e) {
      trunk_error = e.what();
      break;
    }
    if (options.record_profiles) trunk_profile.push_back(candidate_score(CandidateKind::switch_instant, options.score, trunk.scores()[0]));
  }

  std::vector<CandidateResult> out(k);
  std::vector<std::exception_ptr> errors(k);
#pragma omp parallel for schedule(dynamic, 1)
  for (long ii = 0; ii < static_cast<long>(k); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      if (!forks[i]) {
        out[i] = aborted_candidate(grid.values[i], trunk_error, n, options);
        continue;
      }
      SindyKalmanFilter skf = std::move(*forks[i]);
      forks[i].reset();
      skf.set_model(candidate_model(base, grid.kind, grid.values[i], options));
      // The reset belongs to the time update after sample fork_at - 1.
      if (fork_at[i] >= 1) skf.reset_prior();
      out[i] = finish_candidate(grid.values[i], grid.kind, std::move(skf), std::move(prefixes[i]), stream, fork_at[i],
                                options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::size_t argmin(const std::vector<double>& scores) {
  // Values are increasing, so the first minimum is the smallest candidate.
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] < scores[best] || (std::isnan(scores[best]) && !std::isnan(scores[i]))) best = i;
  return best;
}

void finish(BankResult& out, const CandidateGrid& grid, bool profiles, std::size_t steps) {
  out.kind = grid.kind;
  out.best_index = argmin(out.avg_scores());
  out.best_value = out.candidates[out.best_index].value;
  if (!profiles) return;
  out.online_best.resize(steps);
  std::vector<double> col(out.candidates.size());
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = out.candidates[i].profile[t];
    out.online_best[t] = argmin(col);
  }
}

void check_inputs(const CandidateGrid& grid, std::span<const Sample> stream) {
  grid.validate();
  if (stream.empty()) throw std::invalid_argument("run_bank: empty stream");
}

}  // namespace

std::string to_string(CandidateKind kind) {
  switch (kind) {
    case CandidateKind::lambda: return "lambda";
    case CandidateKind::process_variance: return "process_variance";
    case CandidateKind::switch_instant: return "switch_instant";
  }
  return "?";
}

CandidateKind candidate_kind_from_string(const std::string& s) {
  if (s == "lambda") return CandidateKind::lambda;
  if (s == "process_variance") return CandidateKind::process_variance;
  if (s == "switch_instant") return CandidateKind::switch_instant;
  throw std::invalid_argument("unknown candidate kind '" + s + "'");
}

std::string to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::automatic: return "automatic";
    case ScoreKind::raw: return "raw";
    case ScoreKind::sparse: return "sparse";
    case ScoreKind::weighted: return "weighted";
  }
  return "?";
}

ScoreKind score_kind_from_string(const std::string& s) {
  if (s == "automatic") return ScoreKind::automatic;
  if (s == "raw") return ScoreKind::raw;
  if (s == "sparse") return ScoreKind::sparse;
  if (s == "weighted") return ScoreKind::weighted;
  throw std::invalid_argument("unknown score kind '" + s + "'");
}

void CandidateGrid::validate() const {
  if (values.empty()) throw std::invalid_argument("candidate grid is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw std::invalid_argument("candidate grid has a non-finite value");
    if (i > 0 && !(values[i] > values[i - 1])) throw std::invalid_argument("candidate grid must be strictly increasing");
  }
  if (kind != CandidateKind::switch_instant && values.front() < 0.0)
    throw std::invalid_argument("candidate grid values must be >= 0");
}

std::vector<double> BankResult::avg_scores() const {
  std::vector<double> s;
  s.reserve(candidates.size());
  for (const auto& c : candidates) s.push_back(c.avg_score);
  return s;
}

FilterModel candidate_model(const FilterModel& base, CandidateKind kind, double value, const BankOptions& options) {
  FilterModel m = base;
  switch (kind) {
    case CandidateKind::lambda:
      break;
    case CandidateKind::process_variance: {
      ProcessNoise pn = ProcessNoise::random_walk(base.dim(), options.drift_indices, value);
      pn.set_switches(base.process.switches(), base.process.handling(), base.process.gamma());
      m.process = std::move(pn);
      break;
    }
    case CandidateKind::switch_instant: {
      const long instant = std::lround(value);
      ProcessNoise pn = base.process.base() ? ProcessNoise::constant(*base.process.base()) : ProcessNoise::zero();
      pn.set_switches({instant}, options.switch_handling, base.process.gamma());
      m.process = std::move(pn);
      break;
    }
  }
  return m;
}

BankResult run_bank(const FilterModel& base, const CandidateGrid& grid, double lambda, std::span<const Sample> stream,
                    const BankOptions& options) {
  if (!options.parallel) return run_bank_serial(base, grid, lambda, stream, options);
  check_inputs(grid, stream);
  base.validate();

  BankResult out;
  if (grid.kind == CandidateKind::switch_instant && options.switch_handling == SwitchHandling::exact_reset) {
    out.candidates = run_switch_candidates(base, grid, lambda, stream, options);
    finish(out, grid, options.record_profiles, stream.size());
    return out;
  }
  const auto n = static_cast<long>(grid.values.size());
  out.candidates.resize(grid.values.size());
  std::vector<std::exception_ptr> errors(grid.values.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out.candidates[k] = run_candidate(base, grid, k, lambda, stream, options);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  finish(out, grid, options.record_profiles, stream.size());
  return out;
}

BankResult run_bank_serial(const FilterModel& base, const CandidateGrid& grid, double lambda,
                           std::span<const Sample> stream, const BankOptions& options) {
  check_inputs(grid, stream);
  base.validate();
  BankResult out;
  out.candidates.reserve(grid.values.size());
  for (std::size_t k = 0; k < grid.values.size(); ++k)
    out.candidates.push_back(run_candidate(base, grid, k, lambda, stream, options));
  finish(out, grid, options.record_profiles, stream.size());
  return out;
}

std::pair<double, BankResult> select_lambda(const FilterModel& model, std::vector<double> lambda_grid,
                                            std::span<const Sample> stream, const BankOptions& options) {
  BankResult r = run_bank(model, {CandidateKind::lambda, std::move(lambda_grid)}, 0.0, stream, options);
  return {r.best_value, std::move(r)};
}

std::pair<double, BankResult> select_process_variance(const FilterModel& model, std::vector<double> q_grid,
                                                      double lambda, std::span<const Sample> stream,
                                                      const BankOptions& options) {
  BankResult r = run_bank(model, {CandidateKind::process_variance, std::move(q_grid)}, lambda, stream, options);
  return {r.best_value, std::move(r)};
}

std::pair<double, BankResult> detect_switch(const FilterModel& model, std::vector<double> instant_grid, double lambda,
                                            std::span<const Sample> stream, const BankOptions& options) {
  BankResult r = run_bank(model, {CandidateKind::switch_instant, std::move(instant_grid)}, lambda, stream, options);
  return {r.best_value, std::move(r)};
}

}  // namespace skf
