#include "skf/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace skf {

namespace {

void require_finite_state(const std::array<double, 3>& x, double t) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "lorenz_simulate: state blew up at t = " << t;
      throw std::runtime_error(os.str());
    }
  }
}

std::size_t sample_count(double dt, double T) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("horizon must be > 0");
  const double n = std::round(T / dt);
  if (n < 1.0) throw std::invalid_argument("horizon shorter than one step");
  return static_cast<std::size_t>(n);
}

std::vector<double> ornstein_uhlenbeck(std::mt19937_64& rng, std::size_t n, double dt, double mean, double std,
                                       double tau) {
  std::normal_distribution<double> z(0.0, 1.0);
  const double a = std::exp(-dt / tau);
  const double s = std * std::sqrt(1.0 - a * a);
  std::vector<double> x(n);
  if (n == 0) return x;
  x[0] = mean + std * z(rng);
  for (std::size_t i = 1; i < n; ++i) x[i] = mean + a * (x[i - 1] - mean) + s * z(rng);
  return x;
}

void low_pass(std::vector<double>& x, double dt, double tau) {
  if (tau <= 0.0) return;
  const double a = std::exp(-dt / tau);
  for (std::size_t i = 1; i < x.size(); ++i) x[i] = a * x[i - 1] + (1.0 - a) * x[i];
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t component) {
  return splitmix64(splitmix64(root) ^ (component * 0xd1b54a32d192ed03ULL));
}

TimeFunction TimeFunction::constant(double v) {
  TimeFunction f;
  f.v0 = f.v1 = v;
  return f;
}

TimeFunction TimeFunction::ramp(double t_start, double t_end, double v0, double v1) {
  TimeFunction f{Kind::ramp, v0, v1, t_start, t_end};
  f.validate();
  return f;
}

TimeFunction TimeFunction::step(double t_switch, double v0, double v1) {
  TimeFunction f{Kind::step, v0, v1, t_switch, t_switch};
  f.validate();
  return f;
}

double TimeFunction::operator()(double t) const {
  switch (kind) {
    case Kind::constant:
      return v0;
    case Kind::ramp:
      if (t <= t_start) return v0;
      if (t >= t_end) return v1;
      return v0 + (v1 - v0) * (t - t_start) / (t_end - t_start);
    case Kind::step:
      return t >= t_start - 1e-9 * std::max(1.0, std::abs(t_start)) ? v1 : v0;
  }
  return v0;
}

void TimeFunction::validate() const {
  if (!std::isfinite(v0) || !std::isfinite(v1) || !std::isfinite(t_start) || !std::isfinite(t_end))
    throw std::invalid_argument("time function has non-finite fields");
  if (kind == Kind::ramp && !(t_start < t_end)) throw std::invalid_argument("ramp needs t_start < t_end");
}

std::array<double, 3> LorenzSchedule::rhs(double t, const std::array<double, 3>& x) const {
  const double s = sigma(t);
  return {s * (x[1] - x[0]), x[0] * (rho - x[2]) - x[1], x[0] * x[1] - beta * x[2]};
}

std::array<double, 3> lorenz_rk4_step(const LorenzSchedule& schedule, double t, const std::array<double, 3>& x,
                                      double h) {
  auto axpy = [](const std::array<double, 3>& a, double c, const std::array<double, 3>& b) {
    return std::array<double, 3>{a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]};
  };
  const auto k1 = schedule.rhs(t, x);
  const auto k2 = schedule.rhs(t + h / 2, axpy(x, h / 2, k1));
  const auto k3 = schedule.rhs(t + h / 2, axpy(x, h / 2, k2));
  const auto k4 = schedule.rhs(t + h, axpy(x, h, k3));
  std::array<double, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = x[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

GeneratedStream lorenz_simulate(const LorenzSchedule& schedule, const std::array<double, 3>& x0, double dt, double T) {
  schedule.sigma.validate();
  const std::size_t n = sample_count(dt, T);
  GeneratedStream g;
  g.names = {"x1", "x2", "x3"};
  g.times.resize(n);
  g.states.resize(static_cast<Eigen::Index>(n), 3);
  g.derivatives.resize(static_cast<Eigen::Index>(n), 3);
  std::array<double, 3> x = x0;
  require_finite_state(x, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const auto r = static_cast<Eigen::Index>(k);
    g.times[k] = t;
    const auto d = schedule.rhs(t, x);
    for (int i = 0; i < 3; ++i) {
      g.states(r, i) = x[i];
      g.derivatives(r, i) = d[i];
    }
    if (k + 1 < n) {
      x = lorenz_rk4_step(schedule, t, x, dt);
      require_finite_state(x, t + dt);
    }
  }
  g.y = g.derivatives.col(0);
  return g;
}

double noise_variance_for(std::span<const double> clean, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  if (!std::isfinite(snr_db)) throw std::invalid_argument("snr_db must be finite or +inf");
  if (clean.empty()) return 0.0;
  double power = 0.0;
  for (double v : clean) power += v * v;
  power /= static_cast<double>(clean.size());
  return power / std::pow(10.0, snr_db / 10.0);
}

std::vector<double> add_noise(std::span<const double> clean, double snr_db, std::uint64_t seed) {
  std::vector<double> out(clean.begin(), clean.end());
  const double var = noise_variance_for(clean, snr_db);
  if (var == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, std::sqrt(var));
  for (double& v : out) v += z(rng);
  return out;
}

void measure_derivative(GeneratedStream& gen, int target, double snr_db, std::uint64_t seed) {
  if (target < 0 || target >= gen.derivatives.cols()) throw std::invalid_argument("measure_derivative: bad target");
  const Vector clean = gen.derivatives.col(target);
  const std::span<const double> s(clean.data(), static_cast<std::size_t>(clean.size()));
  const std::vector<double> noisy = add_noise(s, snr_db, seed);
  gen.y = Eigen::Map<const Vector>(noisy.data(), static_cast<Eigen::Index>(noisy.size()));
  gen.target = target;
  gen.seed = seed;
  gen.snr_db = snr_db;
  gen.noise_var = noise_variance_for(s, snr_db);
}

AircraftExcitation generate_excitation(const ExcitationConfig& cfg, std::size_t n, double dt, std::uint64_t seed) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  AircraftExcitation e;

  e.speed = ornstein_uhlenbeck(rng, n, dt, cfg.speed_mean, cfg.speed_mean * cfg.speed_spread, cfg.speed_tau);
  low_pass(e.speed, dt, cfg.speed_smooth);
  for (double& v : e.speed) v = std::clamp(v, cfg.speed_min, cfg.speed_max);

  e.delta = ornstein_uhlenbeck(rng, n, dt, 0.0, cfg.delta_std, cfg.delta_tau);
  low_pass(e.delta, dt, cfg.delta_smooth);
  const double phase = phase_dist(rng);
  for (std::size_t i = 0; i < n; ++i)
    e.delta[i] += cfg.delta_sine_amp *
                  std::sin(2.0 * std::numbers::pi * static_cast<double>(i) * dt / cfg.delta_sine_period + phase);

  e.omega_y = ornstein_uhlenbeck(rng, n, dt, 0.0, cfg.rate_std, cfg.rate_tau);
  low_pass(e.omega_y, dt, cfg.rate_smooth);
  e.omega_z = ornstein_uhlenbeck(rng, n, dt, 0.0, cfg.rate_std, cfg.rate_tau);
  low_pass(e.omega_z, dt, cfg.rate_smooth);
  return e;
}

GeneratedStream aircraft_simulate(const AircraftExcitation& ex, const AircraftCoefficients& c, double dt,
                                  double omega_x0) {
  const std::size_t n = ex.delta.size();
  if (ex.speed.size() != n || ex.omega_y.size() != n || ex.omega_z.size() != n)
    throw std::invalid_argument("aircraft_simulate: excitation signals differ in length");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!std::isfinite(c.c1) || !std::isfinite(c.c2)) throw std::invalid_argument("non-finite coefficients");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(ex.delta[i]) || !std::isfinite(ex.speed[i]) || !std::isfinite(ex.omega_y[i]) ||
        !std::isfinite(ex.omega_z[i]))
      throw std::invalid_argument("aircraft_simulate: non-finite excitation");

  GeneratedStream g;
  g.names = {"wx", "wy", "wz", "d", "V"};
  g.times.resize(n);
  g.states.resize(static_cast<Eigen::Index>(n), 5);
  g.derivatives.resize(static_cast<Eigen::Index>(n), 1);

  auto f = [&](std::size_t i, double s, double w) {
    const std::size_t j = std::min(i + 1, n - 1);
    const double v = (1 - s) * ex.speed[i] + s * ex.speed[j];
    const double d = (1 - s) * ex.delta[i] + s * ex.delta[j];
    return c.c1 * v * v * d + c.c2 * v * w;
  };

  double w = omega_x0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    g.times[i] = static_cast<double>(i) * dt;
    g.states.row(r) << w, ex.omega_y[i], ex.omega_z[i], ex.delta[i], ex.speed[i];
    g.derivatives(r, 0) = f(i, 0.0, w);
    if (i + 1 < n) {
      const double k1 = f(i, 0.0, w);
      const double k2 = f(i, 0.5, w + dt / 2 * k1);
      const double k3 = f(i, 0.5, w + dt / 2 * k2);
      const double k4 = f(i, 1.0, w + dt * k3);
      w += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (!std::isfinite(w)) {
        std::ostringstream os;
        os << "aircraft_simulate: omega_x blew up at t = " << g.times[i] + dt;
        throw std::runtime_error(os.str());
      }
    }
  }
  g.y = g.derivatives.col(0);
  return g;
}

DerivativeSeries estimate_derivatives(std::span<const double> samples, double dt, double window_len, int poly_degree,
                                      double stride) {
  if (!(dt > 0.0)) throw std::invalid_argument("estimate_derivatives: dt must be > 0");
  if (poly_degree < 1) throw std::invalid_argument("estimate_derivatives: degree must be >= 1");
  if (!(window_len > 0.0)) throw std::invalid_argument("estimate_derivatives: window must be > 0");
  const long half = static_cast<long>(std::floor(window_len / (2.0 * dt) + 1e-9));
  const long width = 2 * half + 1;
  if (width < poly_degree + 1)
    throw std::invalid_argument("estimate_derivatives: window holds fewer samples than the polynomial needs");
  const long step = std::max(1L, std::lround(stride / dt));

  // Rows 0 and 1 of the pseudoinverse of the Vandermonde matrix in (t - t_c)
  // give the fitted value and slope at the centre.
  Matrix vander(width, poly_degree + 1);
  for (long k = 0; k < width; ++k) {
    const double tau = static_cast<double>(k - half) * dt;
    double p = 1.0;
    for (int j = 0; j <= poly_degree; ++j, p *= tau) vander(k, j) = p;
  }
  const Matrix weights = vander.completeOrthogonalDecomposition().pseudoInverse().topRows(2);

  DerivativeSeries out;
  const long n = static_cast<long>(samples.size());
  for (long c = 0; c < n; c += step) {
    if (c - half < 0 || c + half >= n) {
      ++out.skipped;
      continue;
    }
    const Eigen::Map<const Vector> win(samples.data() + (c - half), width);
    out.centers.push_back(c);
    out.values.push_back(weights.row(0).dot(win));
    out.derivatives.push_back(weights.row(1).dot(win));
  }
  return out;
}

GeneratedStream aircraft_measurements(const GeneratedStream& clean, double snr_db, const DerivativeConfig& deriv,
                                      std::uint64_t seed) {
  if (clean.states.cols() != 5 || clean.size() < 2) throw std::invalid_argument("aircraft_measurements: bad stream");
  const double dt = clean.times[1] - clean.times[0];
  const auto n = static_cast<std::size_t>(clean.states.rows());

  std::vector<DerivativeSeries> fits;
  for (int col = 0; col < 3; ++col) {
    const Vector x = clean.states.col(col);
    const std::span<const double> s(x.data(), n);
    const std::vector<double> noisy = add_noise(s, snr_db, derive_seed(seed, kSeedStateNoise + 16 * col));
    fits.push_back(estimate_derivatives(noisy, dt, deriv.window_len, deriv.poly_degree, deriv.stride));
  }

  const DerivativeSeries& ref = fits[0];
  const std::size_t m = ref.centers.size();
  GeneratedStream g;
  g.names = clean.names;
  g.times.resize(m);
  g.states.resize(static_cast<Eigen::Index>(m), 5);
  g.derivatives.resize(static_cast<Eigen::Index>(m), 1);
  g.y.resize(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    const auto c = static_cast<Eigen::Index>(ref.centers[k]);
    g.times[k] = clean.times[static_cast<std::size_t>(c)];
    g.states.row(r) << fits[0].values[k], fits[1].values[k], fits[2].values[k], clean.states(c, 3), clean.states(c, 4);
    g.derivatives(r, 0) = clean.derivatives(c, 0);
    g.y(r) = ref.derivatives[k];
  }
  g.target = 0;
  g.seed = seed;
  g.snr_db = snr_db;
  g.noise_var = m > 0 ? (g.y - g.derivatives.col(0)).squaredNorm() / static_cast<double>(m) : 0.0;
  return g;
}

Stream make_stream(const GeneratedStream& gen, const MonomialLibrary& lib, std::span<const std::size_t> selector) {
  if (selector.size() != lib.n_vars()) throw std::invalid_argument("make_stream: selector size != library inputs");
  for (std::size_t s : selector)
    if (s >= static_cast<std::size_t>(gen.states.cols())) throw std::invalid_argument("make_stream: selector out of range");
  if (gen.y.size() != gen.states.rows()) throw std::invalid_argument("make_stream: y length != sample count");

  Stream out;
  out.reserve(gen.size());
  std::vector<double> x(selector.size());
  for (Eigen::Index r = 0; r < gen.states.rows(); ++r) {
    for (std::size_t i = 0; i < selector.size(); ++i) x[i] = gen.states(r, static_cast<Eigen::Index>(selector[i]));
    out.push_back({build_row(x, lib, static_cast<long>(r)), gen.y(r)});
  }
  return out;
}

Stream make_stream(const GeneratedStream& gen, const MonomialLibrary& lib) {
  std::vector<std::size_t> all(lib.n_vars());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return make_stream(gen, lib, all);
}

Vector lorenz_true_coefficients(const MonomialLibrary& lib, int component, double sigma, double rho, double beta) {
  if (lib.n_vars() != 3) throw std::invalid_argument("lorenz library must have 3 inputs");
  Vector xi = Vector::Zero(static_cast<Eigen::Index>(lib.size()));
  auto set = [&](const Exponent& e, double v) {
    const auto j = lib.index_of(e);
    if (!j) throw std::invalid_argument("library lacks a Lorenz term");
    xi(static_cast<Eigen::Index>(*j)) = v;
  };
  switch (component) {
    case 0: set({1, 0, 0}, -sigma); set({0, 1, 0}, sigma); break;
    case 1: set({1, 0, 0}, rho); set({0, 1, 0}, -1.0); set({1, 0, 1}, -1.0); break;
    case 2: set({1, 1, 0}, 1.0); set({0, 0, 1}, -beta); break;
    default: throw std::invalid_argument("lorenz component must be 0, 1 or 2");
  }
  return xi;
}

Vector aircraft_true_coefficients(const MonomialLibrary& lib, const AircraftCoefficients& coeffs) {
  if (lib.n_vars() != 5) throw std::invalid_argument("aircraft library must have 5 inputs");
  Vector xi = Vector::Zero(static_cast<Eigen::Index>(lib.size()));
  const auto a = lib.index_of({0, 0, 0, 1, 2});
  const auto b = lib.index_of({1, 0, 0, 0, 1});
  if (!a || !b) throw std::invalid_argument("library lacks the roll-equation terms");
  xi(static_cast<Eigen::Index>(*a)) = coeffs.c1;
  xi(static_cast<Eigen::Index>(*b)) = coeffs.c2;
  return xi;
}

}  // namespace skf
