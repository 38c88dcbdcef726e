// skf: simulate streams, identify equations offline or on-line, run
// selection banks and replicate the reference experiments.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skf/config.hpp"
#include "skf/experiments.hpp"
#include "skf/io.hpp"
#include "skf/sindy.hpp"

namespace fs = std::filesystem;
using namespace skf;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> lambda;
};

void add_common(CLI::App* cmd, Common& c, bool with_lambda) {
  cmd->add_option("--config", c.config, "JSON run config");
  cmd->add_option("--seed", c.seed, "Override the config seed");
  cmd->add_option("--out", c.out, "Output directory (default: config output_dir)");
  if (with_lambda) cmd->add_option("--lambda", c.lambda, "Sparsity threshold (replaces the lambda grid)");
}

RunConfig resolve(const Common& c, const std::string& fallback_experiment) {
  RunConfig cfg = c.config.empty() ? default_config(fallback_experiment) : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.lambda) {
    cfg.selection.lambda = *c.lambda;
    cfg.selection.lambda_grid = {*c.lambda};
  }
  cfg.validate();
  return cfg;
}

void write_config(const fs::path& path, const RunConfig& cfg) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << dump_config(cfg);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

GeneratedStream load_stream(const std::string& path, const RunConfig& cfg) {
  if (!path.empty()) return read_stream_csv(fs::path(path));
  const fs::path def = fs::path(cfg.output_dir) / "stream.csv";
  if (fs::exists(def)) return read_stream_csv(def);
  throw std::runtime_error("no stream: pass --stream or run 'skf simulate' first (looked for " + def.string() + ")");
}

Table scores_table(const SindyKalmanFilter& f, const Problem& p) {
  const auto& tr = f.trajectory();
  Table t{{"t", "innovation", "innovation_var"}, {}};
  for (std::size_t k = 0; k < tr.innovation.size(); ++k)
    t.add_row({p.data.times[k], tr.innovation[k], tr.innovation_var[k] ? *tr.innovation_var[k] : NAN});
  return t;
}

Table estimates_table(const Problem& p, std::span<const Vector> est) {
  Table t;
  t.columns.push_back("t");
  for (std::size_t j = 0; j < p.library.size(); ++j) t.columns.push_back(p.library.term_name(j, p.data.names));
  for (std::size_t k = 0; k < est.size(); ++k) {
    std::vector<double> row{p.data.times[k]};
    for (Eigen::Index j = 0; j < est[k].size(); ++j) row.push_back(est[k](j));
    t.add_row(std::move(row));
  }
  return t;
}

int cmd_simulate(const Common& c) {
  const RunConfig cfg = resolve(c, "lorenz-invariant");
  const GeneratedStream g = generate_stream(cfg);
  const fs::path dir = cfg.output_dir;
  write_stream_csv(dir / "stream.csv", g);
  write_config(dir / "config.json", cfg);
  std::cout << "wrote " << g.size() << " samples to " << (dir / "stream.csv").string() << " (seed " << cfg.seed
            << ")\n";
  return 0;
}

int cmd_identify(const Common& c, const std::string& mode, const std::string& stream_path) {
  const RunConfig cfg = resolve(c, "lorenz-invariant");
  const Problem p = make_problem(cfg, load_stream(stream_path, cfg));
  const fs::path dir = cfg.output_dir;
  nlohmann::json report;

  if (mode == "batch") {
    Matrix theta(static_cast<Eigen::Index>(p.stream.size()), static_cast<Eigen::Index>(p.library.size()));
    Vector y(theta.rows());
    for (std::size_t k = 0; k < p.stream.size(); ++k) {
      theta.row(static_cast<Eigen::Index>(k)) = p.stream[k].row.values.transpose();
      y(static_cast<Eigen::Index>(k)) = p.stream[k].y;
    }
    const SparseSolution sol = stls(theta, y, cfg.selection.lambda, cfg.filter.sparsify_max_iter);
    report = {{"mode", "batch"},
              {"lambda", cfg.selection.lambda},
              {"iterations", sol.iterations},
              {"converged", sol.converged},
              {"model", model_report(p.library, sol.coefficients, p.data.names)}};
  } else {
    EngineOptions eo;
    eo.sparsify_max_iter = cfg.filter.sparsify_max_iter;
    eo.record = true;
    const std::vector<double> grid =
        cfg.selection.lambda_grid.empty() ? std::vector<double>{cfg.selection.lambda} : cfg.selection.lambda_grid;
    SindyKalmanFilter f(p.model, grid, eo);
    f.run(p.stream);
    const LambdaChoice choice = choose_lambda(f);
    write_csv(dir / "parameters.csv", estimates_table(p, f.trajectory().sparse[choice.best]),
              "sparse estimates, lambda=" + std::to_string(choice.lambda));
    write_csv(dir / "filtered_means.csv", estimates_table(p, f.trajectory().mean_filt));
    write_csv(dir / "scores.csv", scores_table(f, p));
    report = {{"mode", "online"},
              {"lambda", choice.lambda},
              {"lambda_grid", choice.grid},
              {"lambda_scores", choice.scores},
              {"model", model_report(p.library, f.sparse()[choice.best].coefficients, p.data.names)}};
  }
  report["seed"] = p.data.seed;
  write_json(dir / "model.json", report);
  std::cout << report["model"].dump(2) << "\n";
  return 0;
}

CandidateGrid parse_grid(const std::string& spec, const RunConfig& cfg) {
  const auto colon = spec.find(':');
  CandidateGrid g;
  g.kind = candidate_kind_from_string(spec.substr(0, colon));
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) g.values.push_back(std::stod(tok));
  } else {
    switch (g.kind) {
      case CandidateKind::lambda: g.values = cfg.selection.lambda_grid; break;
      case CandidateKind::process_variance: g.values = cfg.selection.q_grid; break;
      case CandidateKind::switch_instant: g.values = cfg.selection.switch_grid; break;
    }
  }
  g.validate();
  return g;
}

int cmd_bank(const Common& c, const std::string& grid_spec, const std::string& stream_path, bool serial) {
  const RunConfig cfg = resolve(c, "lorenz-invariant");
  const Problem p = make_problem(cfg, load_stream(stream_path, cfg));
  const CandidateGrid grid = parse_grid(grid_spec, cfg);
  BankOptions bo;
  bo.parallel = !serial;
  bo.drift_indices = cfg.filter.drift_indices;
  bo.switch_handling = cfg.filter.switch_handling;
  bo.sparsify_max_iter = cfg.filter.sparsify_max_iter;
  if (grid.kind == CandidateKind::switch_instant) bo.score = cfg.selection.switch_score;
  const BankResult bank = run_bank(p.model, grid, cfg.selection.lambda, p.stream, bo);

  const fs::path dir = cfg.output_dir;
  Table t{{"value", "avg_score", "avg_raw", "avg_sparse", "avg_weighted", "aborted"}, {}};
  for (const auto& cand : bank.candidates)
    t.add_row({cand.value, cand.avg_score, cand.scores.avg_raw(), cand.scores.avg_sparse(), cand.scores.avg_weighted(),
               cand.aborted ? 1.0 : 0.0});
  write_csv(dir / "bank.csv", t, "kind=" + to_string(grid.kind) + " seed=" + std::to_string(p.data.seed));
  auto j = bank_json(bank);
  j["model"] = model_report(p.library, bank.candidates[bank.best_index].final_sparse.coefficients, p.data.names);
  write_json(dir / "bank.json", j);
  for (const auto& cand : bank.candidates)
    if (cand.aborted) std::cerr << "candidate " << cand.value << " aborted: " << cand.error << "\n";
  std::cout << to_string(grid.kind) << " argmin: " << bank.best_value << "\n";
  return 0;
}

int cmd_replicate(const Common& c, const std::string& experiment, bool serial, bool skip_numerics) {
  RunConfig cfg = default_config(experiment);
  if (!c.config.empty()) {
    cfg = load_config(c.config);
    if (cfg.name != experiment)
      throw ConfigError("config name '" + cfg.name + "' does not match experiment '" + experiment + "'");
  }
  if (c.seed) cfg.seed = *c.seed;
  cfg.output_dir = c.out.empty() ? (fs::path(cfg.output_dir) / experiment).string() : c.out;
  cfg.validate();
  RunOptions opts;
  opts.parallel = !serial;
  opts.check_numerics = !skip_numerics;
  const ExperimentReport r = replicate(cfg, cfg.output_dir, opts);
  for (const auto& check : r.checks)
    std::printf("%s  %-40s %s\n", check.pass ? "PASS" : "FAIL", check.name.c_str(), check.detail.c_str());
  std::printf("%s: %s (%.1f s), outputs in %s\n", experiment.c_str(), r.passed() ? "passed" : "FAILED", r.runtime_s,
              cfg.output_dir.c_str());
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse identification of time-varying equations with a Kalman filter"};
  app.require_subcommand(1);

  Common sim, idf, bnk, rep;
  auto* simulate = app.add_subcommand("simulate", "Generate a stream CSV and its config");
  add_common(simulate, sim, false);

  std::string mode = "online", idf_stream;
  auto* identify = app.add_subcommand("identify", "Identify the equation from a stream");
  add_common(identify, idf, true);
  identify->add_option("--mode", mode, "batch (thresholded least squares) or online (filter)")
      ->check(CLI::IsMember({"batch", "online"}));
  identify->add_option("--stream", idf_stream, "Stream CSV (default: <out>/stream.csv)");

  std::string grid = "lambda", bnk_stream;
  bool bnk_serial = false;
  auto* bank = app.add_subcommand("bank", "Run a filter bank over one hyperparameter grid");
  add_common(bank, bnk, true);
  bank->add_option("--grid", grid, "kind[:v1,v2,...] with kind lambda, process_variance or switch_instant");
  bank->add_option("--stream", bnk_stream, "Stream CSV (default: <out>/stream.csv)");
  bank->add_flag("--serial", bnk_serial, "Run the candidates on one thread");

  std::string experiment;
  bool rep_serial = false, rep_fast = false;
  auto* replicate_cmd = app.add_subcommand("replicate", "Run one reference experiment and check it");
  add_common(replicate_cmd, rep, false);
  replicate_cmd->add_option("experiment", experiment, "lorenz-invariant, lorenz-smooth, lorenz-switch or aircraft")
      ->required()
      ->check(CLI::IsMember(experiment_names()));
  replicate_cmd->add_flag("--serial", rep_serial, "Run bank candidates on one thread");
  replicate_cmd->add_flag("--no-numerics", rep_fast, "Skip the per-step covariance checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*identify) return cmd_identify(idf, mode, idf_stream);
    if (*bank) return cmd_bank(bnk, grid, bnk_stream, bnk_serial);
    return cmd_replicate(rep, experiment, rep_serial, rep_fast);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FilterDivergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
