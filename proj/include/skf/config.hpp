#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "skf/filter.hpp"
#include "skf/scenarios.hpp"
#include "skf/selection.hpp"

namespace skf {

inline constexpr int kConfigSchemaVersion = 1;

/// Invalid configuration. line is 1-based, 0 when unknown; field is the
/// dotted name of the offending entry when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0, std::string field = {})
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        field_(std::move(field)) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

enum class ScenarioKind { lorenz, aircraft };

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::lorenz;
  double dt = 0.01;
  double horizon = 20.0;
  double snr_db = 15.0;

  // lorenz
  std::array<double, 3> x0{-8.0, 7.0, 27.0};
  TimeFunction sigma = TimeFunction::constant(10.0);
  double rho = 28.0;
  double beta = 8.0 / 3.0;
  int target = 0;  // identified equation (0-based)

  // aircraft
  AircraftCoefficients coefficients;
  ExcitationConfig excitation;
  DerivativeConfig derivative;
  double omega_x0 = 0.0;
};

struct LibraryConfig {
  int max_degree = 4;
  bool include_constant = false;
};

enum class PriorKind { noninformative, diffuse };

struct FilterConfig {
  PriorKind prior = PriorKind::noninformative;
  double gamma = 1e8;
  std::optional<double> noise_var;  // default: the variance the generator used
  double rank_tol = kEquilibratedRankTol;
  std::vector<std::size_t> drift_indices;
  double process_variance = 0.0;
  std::vector<long> switch_instants;
  SwitchHandling switch_handling = SwitchHandling::exact_reset;
  int sparsify_max_iter = 20;
};

struct SelectionConfig {
  double lambda = 0.4;
  std::vector<double> lambda_grid;
  std::vector<double> q_grid;
  std::vector<double> switch_grid;  // sample indices; values >= stream length mean "no switch"
  ScoreKind switch_score = ScoreKind::automatic;
};

struct RunConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  ScenarioConfig scenario;
  LibraryConfig library;
  FilterConfig filter;
  SelectionConfig selection;

  /// Throws ConfigError on values no run can use.
  void validate() const;
};

/// Parses and validates a JSON config. Unknown fields, type errors and
/// invalid values raise ConfigError carrying the line of the offending key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& cfg);
/// Pretty-printed JSON that parse_config maps back to cfg.
std::string dump_config(const RunConfig& cfg);

/// Settings of one of the replication experiments: lorenz-invariant,
/// lorenz-smooth, lorenz-switch, aircraft.
RunConfig default_config(std::string_view experiment);
const std::vector<std::string>& experiment_names();

}  // namespace skf
