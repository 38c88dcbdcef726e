#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skf/engine.hpp"

namespace skf {

enum class CandidateKind { lambda, process_variance, switch_instant };

std::string to_string(CandidateKind kind);
CandidateKind candidate_kind_from_string(const std::string& s);

/// Hypothesised hyperparameter values. Switch instants are sample indices;
/// an instant at or past the end of the stream means "no switch".
struct CandidateGrid {
  CandidateKind kind = CandidateKind::lambda;
  std::vector<double> values;

  /// Throws std::invalid_argument unless values are nonempty, finite and
  /// strictly increasing.
  void validate() const;
};

/// Average used to rank candidates. automatic: the sparse-estimate score
/// for lambda grids, the raw innovation score otherwise.
enum class ScoreKind { automatic, raw, sparse, weighted };

std::string to_string(ScoreKind kind);
ScoreKind score_kind_from_string(const std::string& s);

struct BankOptions {
  ScoreKind score = ScoreKind::automatic;
  bool parallel = true;
  bool record_profiles = false;             // running average score of every candidate per step
  std::vector<std::size_t> drift_indices;   // coordinates given the candidate random-walk variance
  SwitchHandling switch_handling = SwitchHandling::exact_reset;
  int sparsify_max_iter = 20;
  bool check_numerics = false;
};

struct CandidateResult {
  double value = 0.0;
  double avg_score = 0.0;  // +inf when the filter aborted
  ScoreAccumulator scores;
  SparseEstimate final_sparse;
  Vector final_mean;
  bool aborted = false;
  std::string error;
  NumericalDiagnostics diagnostics;
  std::vector<double> profile;  // only with record_profiles
};

struct BankResult {
  CandidateKind kind = CandidateKind::lambda;
  std::vector<CandidateResult> candidates;
  std::size_t best_index = 0;
  double best_value = 0.0;
  std::vector<std::size_t> online_best;  // currently best candidate after each step, only with record_profiles

  std::vector<double> avg_scores() const;
};

/// The base model with one candidate value substituted according to kind.
FilterModel candidate_model(const FilterModel& base, CandidateKind kind, double value, const BankOptions& options = {});

/// Runs one filter per candidate over the whole stream and picks the
/// candidate with the smallest average score (see ScoreKind). Ties go to the smaller
/// value. For non-lambda grids, `lambda` sets the threshold of the reported
/// sparse estimates. Candidates are processed with OpenMP when
/// options.parallel is set; results do not depend on it.
BankResult run_bank(const FilterModel& base, const CandidateGrid& grid, double lambda, std::span<const Sample> stream,
                    const BankOptions& options = {});

/// Single-threaded reference implementation of run_bank.
BankResult run_bank_serial(const FilterModel& base, const CandidateGrid& grid, double lambda,
                           std::span<const Sample> stream, const BankOptions& options = {});

std::pair<double, BankResult> select_lambda(const FilterModel& model, std::vector<double> lambda_grid,
                                            std::span<const Sample> stream, const BankOptions& options = {});

std::pair<double, BankResult> select_process_variance(const FilterModel& model, std::vector<double> q_grid,
                                                      double lambda, std::span<const Sample> stream,
                                                      const BankOptions& options = {});

std::pair<double, BankResult> detect_switch(const FilterModel& model, std::vector<double> instant_grid, double lambda,
                                            std::span<const Sample> stream, const BankOptions& options = {});

}  // namespace skf
