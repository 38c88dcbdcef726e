#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skf/config.hpp"
#include "skf/engine.hpp"
#include "skf/io.hpp"
#include "skf/selection.hpp"

namespace skf {

/// Data, library and filter model derived from one config.
struct Problem {
  RunConfig config;
  GeneratedStream data;
  MonomialLibrary library;
  Stream stream;
  FilterModel model;
};

/// Simulates the configured scenario. All randomness derives from cfg.seed.
GeneratedStream generate_stream(const RunConfig& cfg);
MonomialLibrary build_library(const RunConfig& cfg);
/// Filter model from cfg.filter; the noise variance defaults to the one the
/// generator used.
FilterModel build_model(const RunConfig& cfg, std::size_t dim, double stream_noise_var);
Problem make_problem(const RunConfig& cfg);
Problem make_problem(const RunConfig& cfg, GeneratedStream data);

/// True coefficients of the identified equation at time t.
Vector true_coefficients(const RunConfig& cfg, const MonomialLibrary& lib, double t);
std::vector<std::size_t> support_of(const Vector& coefficients);

/// When the sparse estimates first hit the true support, and how often they
/// leave it afterwards.
struct SupportTrack {
  long first_correct = -1;
  long wrong_after_first = 0;
  long last_wrong = -1;
};
SupportTrack track_support(std::span<const Vector> sparse, std::span<const std::size_t> truth, std::size_t begin = 0,
                           std::size_t end = static_cast<std::size_t>(-1));

/// Largest |estimate - truth| / |truth| over the nonzero true coefficients.
double max_relative_error(const Vector& estimate, const Vector& truth);

/// Exact non-informative filter against the large-gamma filter on the same
/// stream. Steps are compared whenever the exact filter has reached full
/// rank (covariance form) since its last reset.
struct GammaComparison {
  long full_rank_step = -1;
  long compared_steps = 0;
  double max_rel_gap = 0.0;
  double final_rel_gap = 0.0;
  long settled_step = -1;  // first compared step after which the gap stays <= tolerance
};
GammaComparison compare_large_gamma(const FilterModel& model, std::span<const Sample> stream, double gamma = 1e8,
                                    double tolerance = 1e-4);

/// Threshold chosen by the average sparse prediction error of one filter
/// carrying the whole grid (the thresholds share the recursion).
struct LambdaChoice {
  std::vector<double> grid;
  std::vector<double> scores;
  std::size_t best = 0;
  double lambda = 0.0;
};
LambdaChoice choose_lambda(const SindyKalmanFilter& filter);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  double runtime_s = 0.0;
  std::vector<Check> checks;
  nlohmann::json metrics = nlohmann::json::object();

  bool passed() const;
  nlohmann::json to_json() const;
};

struct RunOptions {
  bool check_numerics = true;
  bool parallel = true;
  bool record_profiles = true;
};

struct InvariantOutcome {
  LambdaChoice lambda;
  SparseEstimate final_sparse;
  Vector truth;
  SupportTrack support;
  bool final_support_ok = false;
  double final_error = 0.0;
  NumericalDiagnostics numerics;
};

struct SwitchOutcome {
  BankResult bank;
  double detected = 0.0;  // sample index
  LambdaChoice lambda;
  Vector pre_switch;      // sparse estimate after sample detected - 1
  Vector final_estimate;
  Vector truth_pre;
  Vector truth_post;
  double pre_error = 0.0;
  double final_error = 0.0;
  bool pre_support_ok = false;
  bool final_support_ok = false;
  NumericalDiagnostics numerics;
};

struct SmoothOutcome {
  BankResult q_bank;
  double q = 0.0;
  LambdaChoice lambda;
  std::vector<double> sigma_hat;   // (xi_x2 - xi_x1) / 2 per step
  std::vector<double> sigma_true;
  double worst_sigma_error = 0.0;  // over the final half of the horizon
  double fraction_within = 0.0;    // share of final-half steps within 10%
  Vector final_estimate;
  bool final_support_ok = false;
  NumericalDiagnostics numerics;
};

struct AircraftOutcome {
  LambdaChoice lambda;
  SupportTrack support;
  double first_correct_time = -1.0;  // simulated seconds, -1 if never
  Vector final_estimate;
  Vector truth;
  bool final_support_ok = false;
  double final_error = 0.0;
  NumericalDiagnostics numerics;
};

/// Plot-ready tables written by replicate(); keyed by file stem.
struct Tables {
  std::vector<std::pair<std::string, Table>> items;
  void add(std::string name, Table t) { items.emplace_back(std::move(name), std::move(t)); }
};

InvariantOutcome run_lorenz_invariant(const Problem& problem, const RunOptions& options = {}, Tables* tables = nullptr);
SwitchOutcome run_lorenz_switch(const Problem& problem, const RunOptions& options = {}, Tables* tables = nullptr);
SmoothOutcome run_lorenz_smooth(const Problem& problem, const RunOptions& options = {}, Tables* tables = nullptr);
AircraftOutcome run_aircraft(const Problem& problem, const RunOptions& options = {}, Tables* tables = nullptr);

// Acceptance thresholds of the single-run checks.
inline constexpr long kInvariantRecoverBy = 500;       // samples
inline constexpr double kLorenzCoefficientTol = 0.02;  // relative
inline constexpr double kSigmaTrackTol = 0.10;         // relative
inline constexpr double kAircraftRecoverBy = 60.0;     // seconds
inline constexpr double kAircraftCoefficientTol = 0.05;

ExperimentReport report(const Problem& p, const InvariantOutcome& o);
ExperimentReport report(const Problem& p, const SwitchOutcome& o);
ExperimentReport report(const Problem& p, const SmoothOutcome& o);
ExperimentReport report(const Problem& p, const AircraftOutcome& o);

/// Runs the experiment named by cfg.name end to end, writes report.json,
/// config.json, stream.csv and the plot tables under out_dir (if not
/// empty), and returns the report.
ExperimentReport replicate(const RunConfig& cfg, const std::filesystem::path& out_dir, const RunOptions& options = {});

}  // namespace skf
