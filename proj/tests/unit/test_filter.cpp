#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "skf/engine.hpp"
#include "skf/filter.hpp"
#include "skf/scores.hpp"
#include "skf/sindy.hpp"
#include "skf/sparsify.hpp"

using namespace skf;

namespace {

FilterModel informative(std::size_t p, const Matrix& cov, double eta2) {
  FilterModel m = FilterModel::time_invariant(p, InformativePrior{cov}, eta2);
  return m;
}

}  // namespace

TEST_CASE("informative prior initialises the prediction") {
  const auto m = informative(3, Matrix::Identity(3, 3), 1.0);
  const auto s = init(m);
  CHECK(s.mode == FilterMode::covariance);
  CHECK(s.mean_pred.isZero());
  CHECK(s.cov_pred.isIdentity());
}

TEST_CASE("non-informative prior starts from a zero information matrix") {
  const auto m = FilterModel::time_invariant(3);
  const auto s = init(m);
  CHECK(s.mode == FilterMode::information);
  CHECK(s.info_pred.isZero());
}

TEST_CASE("first non-informative update is the pseudoinverse solution") {
  auto m = FilterModel::time_invariant(3);
  auto s = init(m);
  const Vector row = (Vector(3) << 1.0, -2.0, 0.5).finished();
  step(s, m, row, 3.0);
  const Vector oracle = row * (3.0 / row.squaredNorm());  // (r r^T)^+ r y
  CHECK((s.mean_filt - oracle).norm() < 1e-12);
}

TEST_CASE("non-informative estimates do not depend on the noise variance") {
  std::mt19937_64 rng(21);
  const Matrix theta = test::random_matrix(rng, 30, 5);
  const Vector y = test::random_vector(rng, 30);
  auto a = FilterModel::time_invariant(5, NonInformativePrior{}, 1.0);
  auto b = FilterModel::time_invariant(5, NonInformativePrior{}, 37.5);
  auto sa = init(a), sb = init(b);
  for (Eigen::Index k = 0; k < theta.rows(); ++k) {
    step(sa, a, theta.row(k).transpose(), y(k));
    step(sb, b, theta.row(k).transpose(), y(k));
    CHECK(test::rel_diff(sa.mean_filt, sb.mean_filt) < 1e-10);
  }
}

TEST_CASE("scalar Kalman step") {
  const auto m = informative(1, Matrix::Identity(1, 1), 1.0);
  auto s = init(m);
  const auto out = step(s, m, Vector::Ones(1), 2.0);
  CHECK(s.mean_filt(0) == doctest::Approx(1.0));
  CHECK(s.cov_filt(0, 0) == doctest::Approx(0.5));
  CHECK(out.innovation == doctest::Approx(2.0));
  REQUIRE(out.innovation_var);
  CHECK(*out.innovation_var == doctest::Approx(2.0));
}

TEST_CASE("zero innovation leaves the mean unchanged") {
  std::mt19937_64 rng(4);
  auto m = informative(4, test::random_spd(rng, 4), 0.3);
  m.prior_mean = test::random_vector(rng, 4);
  auto s = init(m);
  const Vector row = test::random_vector(rng, 4);
  const auto out = step(s, m, row, row.dot(m.prior_mean));
  CHECK(out.innovation == doctest::Approx(0.0));
  CHECK((s.mean_filt - m.prior_mean).norm() < 1e-12);
}

TEST_CASE("recursive estimate equals the batch ridge solution") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index p = 1 + rep % 6;
    const Eigen::Index t = 3 + 4 * rep;
    const Matrix theta = test::random_matrix(rng, t, p);
    const Vector y = test::random_vector(rng, t);
    const Matrix prior = test::random_spd(rng, p);
    const double eta2 = 0.5 + rep;
    auto m = informative(static_cast<std::size_t>(p), prior, eta2);
    m.prior_mean = test::random_vector(rng, p);
    auto s = init(m);
    for (Eigen::Index k = 0; k < t; ++k) step(s, m, theta.row(k).transpose(), y(k));
    const Matrix pinv = prior.inverse();
    const Vector batch = (theta.transpose() * theta + eta2 * pinv)
                             .ldlt()
                             .solve(theta.transpose() * y + eta2 * pinv * m.prior_mean);
    CHECK(test::rel_diff(s.mean_filt, batch) < 1e-8);
  }
}

TEST_CASE("non-informative filter matches least squares once the design has full rank") {
  std::mt19937_64 rng(12);
  const Matrix theta = test::random_matrix(rng, 40, 6);
  const Vector y = test::random_vector(rng, 40);
  auto m = FilterModel::time_invariant(6);
  auto s = init(m);
  for (Eigen::Index k = 0; k < 40; ++k) step(s, m, theta.row(k).transpose(), y(k));
  CHECK(s.mode == FilterMode::covariance);
  CHECK(test::rel_diff(s.mean_filt, least_squares(theta, y)) < 1e-10);
}

TEST_CASE("switch instants reset in the preceding time update") {
  ProcessNoise pn;
  pn.set_switches({5});
  CHECK_FALSE(pn.at(3).reset);
  CHECK(pn.at(4).reset);
  CHECK_FALSE(pn.at(5).reset);
}

TEST_CASE("invalid models are rejected") {
  auto m = FilterModel::time_invariant(3);
  m.noise_var = 0.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  auto m2 = FilterModel::time_invariant(3);
  m2.prior_mean = Vector::Zero(2);
  CHECK_THROWS_AS(m2.validate(), std::invalid_argument);
}

TEST_CASE("sparsify examples") {
  const Vector mean = (Vector(2) << 0.1, 2.0).finished();
  const auto none = sparsify(mean, Matrix::Identity(2, 2), 0.05);
  CHECK(none.coefficients == mean);
  CHECK(none.zero_set.empty());

  const auto diag = sparsify(mean, Matrix::Identity(2, 2), 0.5);
  CHECK(diag.coefficients == (Vector(2) << 0.0, 2.0).finished());

  Matrix cov(2, 2);
  cov << 1.0, 0.5, 0.5, 1.0;
  const auto cond = sparsify(mean, cov, 0.5);
  CHECK(cond.coefficients(0) == 0.0);
  CHECK(cond.coefficients(1) == doctest::Approx(1.95).epsilon(1e-14));
  CHECK(cond.zero_set == std::vector<std::size_t>{0});
  CHECK(cond.converged);
}

TEST_CASE("sparsify with everything below the threshold returns zero") {
  const Vector mean = (Vector(3) << 0.1, -0.2, 0.05).finished();
  const auto s = sparsify(mean, Matrix::Identity(3, 3), 1.0);
  CHECK(s.coefficients.isZero());
  CHECK(s.zero_set.size() == 3);
}

TEST_CASE("sparse one step prediction") {
  SparseEstimate zero;
  zero.coefficients = Vector::Zero(3);
  CHECK(sparse_one_step_prediction(Vector::Ones(3), Matrix::Identity(3, 3), zero) == 0.0);

  SparseEstimate e;
  e.coefficients = (Vector(3) << 1.5, -2.0, 4.0).finished();
  CHECK(sparse_one_step_prediction(Vector::Unit(3, 1), Matrix::Identity(3, 3), e) == -2.0);

  SparseEstimate two;
  two.coefficients = (Vector(2) << 2.0, 4.0).finished();
  CHECK(sparse_one_step_prediction(Vector::Ones(2), 0.5 * Matrix::Identity(2, 2), two) == doctest::Approx(3.0));
}

TEST_CASE("score accumulation") {
  ScoreAccumulator perfect;
  for (int k = 0; k < 5; ++k) perfect = update_scores(perfect, 0.0, 1.0, 0.0);
  CHECK(perfect.sum_raw == 0.0);
  CHECK(perfect.sum_weighted == 0.0);

  const auto one = update_scores({}, 2.0, 2.0, std::nullopt);
  CHECK(one.sum_raw == 4.0);
  CHECK(one.sum_weighted == doctest::Approx(2.0 + std::log(2.0)));
  CHECK(one.count_sparse == 0);

  ScoreAccumulator k;
  for (int i = 0; i < 7; ++i) k = update_scores(k, 2.0, 2.0, 1.0);
  CHECK(k.sum_raw == 7 * 4.0);
  CHECK(k.sum_sparse == 7 * 1.0);
  CHECK(k.sum_weighted == doctest::Approx(7 * (2.0 + std::log(2.0))));
  CHECK(k.count_raw == 7);

  CHECK(std::isinf(ScoreAccumulator{}.avg_raw()));
  const auto skipped = update_scores({}, 1.0, std::nullopt, std::nullopt);
  CHECK(skipped.count_weighted == 0);
}

TEST_CASE("weighted innovations are calibrated under a correct model") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01(0.0, 1.0);
  const std::size_t p = 4;
  const double q = 1e-3, eta2 = 0.25;
  FilterModel m = informative(p, Matrix::Identity(4, 4), eta2);
  m.process = ProcessNoise::random_walk(p, {0, 1, 2, 3}, q);
  Vector xi(4);
  for (auto& v : xi) v = n01(rng);
  auto s = init(m);
  double sum = 0.0;
  const int steps = 5000;
  for (int t = 0; t < steps; ++t) {
    const Vector row = test::random_vector(rng, 4);
    const double y = row.dot(xi) + std::sqrt(eta2) * n01(rng);
    const auto out = step(s, m, row, y);
    sum += out.innovation * out.innovation / *out.innovation_var;
    for (auto& v : xi) v += std::sqrt(q) * n01(rng);
  }
  const double mean = sum / steps;
  CHECK(mean >= 0.9);
  CHECK(mean <= 1.1);
}

TEST_CASE("engine keeps one score and estimate per threshold") {
  std::mt19937_64 rng(14);
  const Matrix theta = test::random_matrix(rng, 25, 5);
  Vector xi = Vector::Zero(5);
  xi(2) = 1.0;
  const Stream st = test::to_stream(theta, theta * xi + 0.01 * test::random_vector(rng, 25));
  EngineOptions eo;
  eo.record = true;
  eo.check_numerics = true;
  SindyKalmanFilter f(FilterModel::time_invariant(5, NonInformativePrior{}, 1e-4), {0.0, 0.5, 10.0}, eo);
  f.run(st);
  CHECK(f.scores().size() == 3);
  CHECK(f.trajectory().sparse[1].size() == 25);
  CHECK(f.scores()[0].count_raw == 25);
  CHECK(f.scores()[0].count_sparse == 24);
  CHECK((f.sparse()[1].coefficients.array() != 0.0).count() == 1);
  CHECK(f.sparse()[2].coefficients.isZero());
  CHECK(f.diagnostics().min_var_margin >= 0.0);
  CHECK_THROWS_AS(SindyKalmanFilter(FilterModel::time_invariant(2), {-1.0}), std::invalid_argument);
}

TEST_CASE("time-invariant non-informative filter reproduces thresholded least squares") {
  std::mt19937_64 rng(5);
  const Matrix theta = test::random_matrix(rng, 60, 6);
  const Vector xi = (Vector(6) << 0.0, 1.5, 0.0, -0.8, 0.05, 0.0).finished();
  const Vector y = theta * xi + 0.05 * test::random_vector(rng, 60);
  const double lambda = 0.2;
  SindyKalmanFilter f(FilterModel::time_invariant(6, NonInformativePrior{}, 0.0025), {lambda});
  f.run(test::to_stream(theta, y));
  const SparseSolution batch = stls(theta, y, lambda);
  CHECK(test::rel_diff(f.sparse()[0].coefficients, batch.coefficients) < 1e-8);
  CHECK(f.sparse()[0].zero_set == std::vector<std::size_t>{0, 2, 4, 5});
}
