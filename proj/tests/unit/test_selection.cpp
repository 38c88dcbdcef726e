#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "skf/config.hpp"
#include "skf/experiments.hpp"
#include "skf/selection.hpp"

using namespace skf;

namespace {

// y_t = theta_t xi_t + e_t with xi_t a random walk of variance q on `drift`
// and a jump to `after` at sample `jump` (no jump when jump < 0).
Stream synthetic(std::uint64_t seed, long n, const Vector& xi0, double noise_sd, double q = 0.0,
                 std::vector<std::size_t> drift = {}, long jump = -1, const Vector& after = {}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const auto p = xi0.size();
  Vector xi = xi0;
  Stream s;
  for (long t = 0; t < n; ++t) {
    if (t == jump) xi = after;
    Vector row(p);
    for (auto& v : row) v = n01(rng);
    s.push_back({{row, t}, row.dot(xi) + noise_sd * n01(rng)});
    for (auto j : drift) xi(static_cast<Eigen::Index>(j)) += std::sqrt(q) * n01(rng);
  }
  return s;
}

}  // namespace

TEST_CASE("candidate grids are validated") {
  CHECK_THROWS_AS((CandidateGrid{CandidateKind::lambda, {}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((CandidateGrid{CandidateKind::lambda, {0.1, 0.1}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((CandidateGrid{CandidateKind::process_variance, {-1.0, 0.0}}).validate(), std::invalid_argument);
  CHECK_NOTHROW((CandidateGrid{CandidateKind::switch_instant, {3.0, 10.0}}).validate());
  CHECK(candidate_kind_from_string(to_string(CandidateKind::switch_instant)) == CandidateKind::switch_instant);
  CHECK(score_kind_from_string(to_string(ScoreKind::weighted)) == ScoreKind::weighted);
  CHECK_THROWS(score_kind_from_string("median"));
}

TEST_CASE("single-candidate grid returns that candidate") {
  const Stream s = synthetic(1, 50, (Vector(3) << 1.0, 0.0, -2.0).finished(), 0.1);
  const auto model = FilterModel::time_invariant(3, NonInformativePrior{}, 0.01);
  const auto [q, bank] = select_process_variance(model, {0.7}, 0.1, s);
  CHECK(q == 0.7);
  CHECK(bank.best_index == 0);
}

TEST_CASE("noiseless sparse stream: in-gap thresholds tie and the smallest wins") {
  const Vector xi = (Vector(5) << 0.0, 2.0, 0.0, -1.0, 0.0).finished();
  std::mt19937_64 rng(2);
  const Matrix theta = test::random_matrix(rng, 40, 5);
  const Stream s = test::to_stream(theta, theta * xi);
  const auto model = FilterModel::time_invariant(5, NonInformativePrior{}, 1e-6);
  const auto [lambda, bank] = select_lambda(model, {0.1, 0.3, 0.6, 0.9}, s);
  CHECK(lambda == 0.1);
  // Estimates differ only while the design is rank deficient; afterwards
  // every in-gap threshold predicts exactly.
  for (const auto& c : bank.candidates) CHECK(test::rel_diff(c.final_sparse.coefficients, xi) < 1e-8);
}

TEST_CASE("threshold above every coefficient scores the signal energy") {
  const Vector xi = (Vector(3) << 1.0, -0.5, 0.25).finished();
  const Stream s = synthetic(3, 80, xi, 0.05);
  const auto model = FilterModel::time_invariant(3, NonInformativePrior{}, 0.0025);
  const auto [lambda, bank] = select_lambda(model, {0.1, 5.0}, s);
  double energy = 0.0;
  for (std::size_t t = 1; t < s.size(); ++t) energy += s[t].y * s[t].y;
  energy /= static_cast<double>(s.size() - 1);
  CHECK(bank.candidates[1].avg_score == doctest::Approx(energy).epsilon(1e-12));
  CHECK(bank.candidates[1].final_sparse.coefficients.isZero());
  CHECK(bank.candidates[0].avg_score < energy);
  CHECK(lambda == 0.1);
}

TEST_CASE("constant parameters: q = 0 attains the minimum") {
  const auto model = FilterModel::time_invariant(3, NonInformativePrior{}, 0.01);
  BankOptions bo;
  bo.drift_indices = {0, 1, 2};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Stream s = synthetic(seed, 400, (Vector(3) << 1.0, -1.0, 0.5).finished(), 0.1);
    const auto [q, bank] = select_process_variance(model, {0.0, 1e-5, 1e-3, 1e-1}, 0.05, s, bo);
    CHECK(q == 0.0);
  }
}

TEST_CASE("drifting parameters: q = 0 scores strictly worse than the best drift") {
  const auto model = FilterModel::time_invariant(3, NonInformativePrior{}, 0.01);
  BankOptions bo;
  bo.drift_indices = {0, 1};
  const Stream s = synthetic(7, 600, (Vector(3) << 1.0, -1.0, 0.5).finished(), 0.1, 1e-3, {0, 1});
  const auto [q, bank] = select_process_variance(model, {0.0, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1}, 0.05, s, bo);
  CHECK(q > 0.0);
  CHECK(bank.candidates[0].avg_score > bank.candidates[bank.best_index].avg_score);
}

TEST_CASE("selected q is within one grid cell of the generating value on average") {
  const auto model = FilterModel::time_invariant(3, NonInformativePrior{}, 0.01);
  BankOptions bo;
  bo.drift_indices = {0, 1};
  const std::vector<double> grid{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  const double truth = 1e-3;
  double mean_log = 0.0;
  const int seeds = 12;
  for (int seed = 1; seed <= seeds; ++seed) {
    const Stream s = synthetic(100 + seed, 1000, (Vector(3) << 1.0, -1.0, 0.5).finished(), 0.1, truth, {0, 1});
    mean_log += std::log10(select_process_variance(model, grid, 0.05, s, bo).first);
  }
  mean_log /= seeds;
  CHECK(std::abs(mean_log - std::log10(truth)) <= 1.0);
}

TEST_CASE("no switch in the data: the no-switch sentinel wins") {
  const auto model = FilterModel::time_invariant(3, NonInformativePrior{}, 0.01);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Stream s = synthetic(seed, 300, (Vector(3) << 1.0, -1.0, 0.5).finished(), 0.1);
    const auto [instant, bank] = detect_switch(model, {50, 100, 150, 200, 250, 300}, 0.05, s);
    CHECK(instant == 300);
  }
}

TEST_CASE("switch scores degrade monotonically away from the true instant on average") {
  const auto model = FilterModel::time_invariant(2, NonInformativePrior{}, 0.01);
  const std::vector<double> grid{100, 150, 200, 250, 300, 350, 400, 450, 500};
  std::vector<double> mean(grid.size(), 0.0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Stream s = synthetic(seed, 600, (Vector(2) << 1.0, -1.0).finished(), 0.1, 0.0, {}, 300,
                               (Vector(2) << -1.0, 2.0).finished());
    const auto bank = detect_switch(model, grid, 0.05, s).second;
    for (std::size_t i = 0; i < grid.size(); ++i) mean[i] += bank.candidates[i].avg_score / 10.0;
  }
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (grid[i + 1] <= 300) CHECK(mean[i] > mean[i + 1]);
    else CHECK(mean[i] < mean[i + 1]);
  }
}

TEST_CASE("bank results do not depend on parallelism") {
  const Stream s = synthetic(9, 300, (Vector(4) << 1.0, 0.0, -0.3, 2.0).finished(), 0.1, 0.0, {}, 150,
                             (Vector(4) << 0.0, 1.0, -0.3, 2.0).finished());
  const auto model = FilterModel::time_invariant(4, NonInformativePrior{}, 0.01);
  BankOptions bo;
  bo.drift_indices = {0, 1};
  bo.record_profiles = true;
  for (const auto& grid : {CandidateGrid{CandidateKind::lambda, {0.0, 0.1, 0.5, 1.5}},
                           CandidateGrid{CandidateKind::process_variance, {0.0, 1e-4, 1e-2}},
                           CandidateGrid{CandidateKind::switch_instant, {20, 100, 150, 200, 290, 300}}}) {
    const auto a = run_bank(model, grid, 0.1, s, bo);
    const auto b = run_bank_serial(model, grid, 0.1, s, bo);
    CHECK(a.best_index == b.best_index);
    CHECK(a.online_best == b.online_best);
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
      CHECK(a.candidates[i].avg_score == doctest::Approx(b.candidates[i].avg_score).epsilon(1e-12));
      CHECK(test::rel_diff(a.candidates[i].final_mean, b.candidates[i].final_mean) < 1e-12);
      CHECK(a.candidates[i].final_sparse.coefficients == b.candidates[i].final_sparse.coefficients);
    }
  }
}

TEST_CASE("a candidate's score does not depend on the rest of the grid") {
  const Stream s = synthetic(11, 200, (Vector(3) << 1.0, -1.0, 0.5).finished(), 0.1, 0.0, {}, 80,
                             (Vector(3) << 2.0, -1.0, 0.0).finished());
  const auto model = FilterModel::time_invariant(3, NonInformativePrior{}, 0.01);
  const auto full = detect_switch(model, {40, 80, 120, 200}, 0.1, s).second;
  const auto alone = detect_switch(model, {80}, 0.1, s).second;
  CHECK(alone.candidates[0].avg_score == doctest::Approx(full.candidates[1].avg_score).epsilon(1e-12));
}

TEST_CASE("switching Lorenz stream: the bank locates the switch") {
  const Problem p = make_problem(default_config("lorenz-switch"));
  RunOptions ro;
  ro.check_numerics = false;
  const SwitchOutcome o = run_lorenz_switch(p, ro);
  CHECK(o.detected == 600);
}

TEST_CASE("smoothly varying Lorenz stream: selected threshold near 0.4" * doctest::may_fail()) {
  const Problem p = make_problem(default_config("lorenz-smooth"));
  RunOptions ro;
  ro.check_numerics = false;
  const SmoothOutcome o = run_lorenz_smooth(p, ro);
  CHECK(o.lambda.lambda >= 0.3);
  CHECK(o.lambda.lambda <= 0.5);
}
