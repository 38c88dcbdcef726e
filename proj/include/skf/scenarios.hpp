#pragma once

#include <cstddef>
#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "skf/basis.hpp"
#include "skf/engine.hpp"

namespace skf {

/// splitmix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of sub-stream `component` derived from a root seed. Every random
/// draw in the generators goes through one of these, so results never
/// depend on evaluation order or thread count.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t component);

// Sub-stream ids used by the generators.
inline constexpr std::uint64_t kSeedMeasurementNoise = 1;
inline constexpr std::uint64_t kSeedExcitation = 2;
inline constexpr std::uint64_t kSeedStateNoise = 3;

/// Scalar function of time: constant, linear ramp between two instants
/// (held constant outside), or a step.
struct TimeFunction {
  enum class Kind { constant, ramp, step };
  Kind kind = Kind::constant;
  double v0 = 0.0;
  double v1 = 0.0;
  double t_start = 0.0;  // ramp start, or the step instant
  double t_end = 0.0;    // ramp end

  static TimeFunction constant(double v);
  static TimeFunction ramp(double t_start, double t_end, double v0, double v1);
  static TimeFunction step(double t_switch, double v0, double v1);

  /// Steps take the new value from t >= t_switch (with a 1e-9 relative
  /// tolerance so that t = k * dt lands on the right side).
  double operator()(double t) const;
  void validate() const;
};

struct LorenzSchedule {
  TimeFunction sigma = TimeFunction::constant(10.0);
  double rho = 28.0;
  double beta = 8.0 / 3.0;

  std::array<double, 3> rhs(double t, const std::array<double, 3>& x) const;
};

/// Sampled signals plus a noisy measurement of one derivative.
struct GeneratedStream {
  std::vector<std::string> names;  // one per state column
  std::vector<double> times;
  Matrix states;                   // samples x signals, noise free
  Matrix derivatives;              // samples x (identified equations), noise free
  Vector y;                        // measurement of the target derivative
  int target = 0;                  // column of `derivatives` measured by y
  std::uint64_t seed = 0;
  double snr_db = std::numeric_limits<double>::infinity();
  double noise_var = 0.0;          // variance of y - derivatives(:, target) as generated

  std::size_t size() const { return times.size(); }
};

/// Fixed-step RK4 on the Lorenz system, sampled at t_k = k dt for
/// k = 0 .. round(T / dt) - 1. No noise: y is the exact first derivative.
GeneratedStream lorenz_simulate(const LorenzSchedule& schedule, const std::array<double, 3>& x0, double dt, double T);

/// One RK4 step of size h from (t, x).
std::array<double, 3> lorenz_rk4_step(const LorenzSchedule& schedule, double t, const std::array<double, 3>& x, double h);

/// Adds N(0, P / 10^(snr_db / 10)) noise, P the mean square of the clean
/// signal. +inf returns the input unchanged.
std::vector<double> add_noise(std::span<const double> clean, double snr_db, std::uint64_t seed);
double noise_variance_for(std::span<const double> clean, double snr_db);

/// Replaces gen.y with derivatives(:, target) plus noise at the given SNR.
void measure_derivative(GeneratedStream& gen, int target, double snr_db, std::uint64_t seed);

/// Coefficients of the roll equation
///   d(omega_x)/dt = c1 V^2 (delta_lx - delta_rx) + c2 V omega_x.
struct AircraftCoefficients {
  double c1 = 1.061e-3;
  double c2 = -4.8e-2;
  // Stored for completeness; the pitch and yaw equations are not simulated.
  std::vector<double> other;
};

/// Exogenous signals sampled on the simulation grid.
struct AircraftExcitation {
  std::vector<double> delta;  // aileron difference, deg
  std::vector<double> speed;  // airspeed, m/s
  std::vector<double> omega_y;
  std::vector<double> omega_z;
};

/// Synthetic excitation: Ornstein-Uhlenbeck processes passed through a first
/// order low-pass, plus a sinusoid on the aileron.
struct ExcitationConfig {
  double speed_mean = 20.0;
  double speed_spread = 0.5;   // OU std as a fraction of the mean
  double speed_tau = 8.0;
  double speed_smooth = 1.0;
  double speed_min = 4.0;
  double speed_max = 40.0;
  double delta_std = 5.0;
  double delta_tau = 3.0;
  double delta_smooth = 1.0;
  double delta_sine_amp = 3.0;
  double delta_sine_period = 12.0;
  double rate_std = 5.0;
  double rate_tau = 3.0;
  double rate_smooth = 1.0;
};

AircraftExcitation generate_excitation(const ExcitationConfig& cfg, std::size_t n, double dt, std::uint64_t seed);

/// RK4 integration of omega_x with inputs linearly interpolated between
/// samples. Columns: omega_x, omega_y, omega_z, delta, V. One derivative
/// column (omega_x). No noise.
GeneratedStream aircraft_simulate(const AircraftExcitation& excitation, const AircraftCoefficients& coeffs, double dt,
                                  double omega_x0 = 0.0);

/// Local polynomial fits on a uniform grid.
struct DerivativeSeries {
  std::vector<long> centers;  // sample index of each window centre
  std::vector<double> values;
  std::vector<double> derivatives;
  long skipped = 0;  // candidate centres whose window ran past the data
};

/// Least-squares polynomial of degree poly_degree over the samples with
/// |t - t_c| <= window_len / 2 around each centre t_c; centres advance by
/// `stride` (a duration, rounded to whole samples). Throws
/// std::invalid_argument if the window holds fewer than poly_degree + 1
/// samples.
DerivativeSeries estimate_derivatives(std::span<const double> samples, double dt, double window_len, int poly_degree,
                                      double stride);

struct DerivativeConfig {
  double window_len = 1.0;
  int poly_degree = 3;
  double stride = 0.01;
};

/// Noises omega_x, omega_y, omega_z at snr_db, smooths them and estimates
/// d(omega_x)/dt with local polynomials. delta and V are taken as measured
/// exactly. The result is sampled at the window centres.
GeneratedStream aircraft_measurements(const GeneratedStream& clean, double snr_db, const DerivativeConfig& deriv,
                                      std::uint64_t seed);

/// Rows of the regression problem: the library evaluated on the selected
/// state columns, paired with y.
Stream make_stream(const GeneratedStream& gen, const MonomialLibrary& lib, std::span<const std::size_t> selector);
Stream make_stream(const GeneratedStream& gen, const MonomialLibrary& lib);

/// True coefficient vector of Lorenz equation `component` (0-based) at
/// parameter values (sigma, rho, beta) on a library over (x1, x2, x3).
Vector lorenz_true_coefficients(const MonomialLibrary& lib, int component, double sigma, double rho, double beta);

/// True roll-equation coefficients on a library over
/// (omega_x, omega_y, omega_z, delta, V).
Vector aircraft_true_coefficients(const MonomialLibrary& lib, const AircraftCoefficients& coeffs);

}  // namespace skf
