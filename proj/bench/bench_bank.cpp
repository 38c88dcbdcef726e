// Filter bank throughput: OpenMP run_bank against the serial reference.

#include <benchmark/benchmark.h>

#include "skf/config.hpp"
#include "skf/experiments.hpp"
#include "skf/selection.hpp"

using namespace skf;

namespace {

struct Fixture {
  Problem problem;
  CandidateGrid grid;
  BankOptions options;
};

const Fixture& switch_fixture() {
  static const Fixture f = [] {
    Fixture x{make_problem(default_config("lorenz-switch")), {}, {}};
    x.grid = {CandidateKind::switch_instant, x.problem.config.selection.switch_grid};
    return x;
  }();
  return f;
}

const Fixture& q_fixture() {
  static const Fixture f = [] {
    RunConfig cfg = default_config("lorenz-smooth");
    cfg.scenario.horizon = 20.0;
    Fixture x{make_problem(cfg), {}, {}};
    x.grid = {CandidateKind::process_variance, cfg.selection.q_grid};
    x.options.drift_indices = cfg.filter.drift_indices;
    return x;
  }();
  return f;
}

template <const Fixture& (*F)(), bool Parallel>
void BM_bank(benchmark::State& state) {
  const Fixture& f = F();
  BankOptions bo = f.options;
  bo.parallel = Parallel;
  const double lambda = f.problem.config.selection.lambda;
  for (auto _ : state) {
    auto r = Parallel ? run_bank(f.problem.model, f.grid, lambda, f.problem.stream, bo)
                      : run_bank_serial(f.problem.model, f.grid, lambda, f.problem.stream, bo);
    benchmark::DoNotOptimize(r.best_index);
  }
  state.counters["candidates"] = static_cast<double>(f.grid.values.size());
  state.counters["samples"] = static_cast<double>(f.problem.stream.size());
}

}  // namespace

BENCHMARK(BM_bank<switch_fixture, true>)->Name("switch_bank/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bank<switch_fixture, false>)->Name("switch_bank/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bank<q_fixture, true>)->Name("q_bank/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bank<q_fixture, false>)->Name("q_bank/serial")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
