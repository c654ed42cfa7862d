#pragma once

// Shared test fixtures and independent oracles. Nothing here calls into the
// code path it is used to check.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tailforce/kinematics.hpp"
#include "tailforce/reactive_model.hpp"
#include "tailforce/time_series.hpp"

namespace fixtures {

inline constexpr double kPi = std::numbers::pi;

// m(s) = C sqrt(l - s), written out by hand: 2 rho beta * c_h[mm^.5] * sqrt(mm).
inline double mass_coefficient(double rho, double beta, double c_h = 0.694) {
  return 2.0 * rho * beta * c_h * 1e-3 * std::sqrt(1000.0);
}
// Closed forms of the added-mass moments.
inline double integral_m(double C, double l) { return C * (2.0 / 3.0) * std::pow(l, 1.5); }
inline double integral_m_s(double C, double l) { return C * (4.0 / 15.0) * std::pow(l, 2.5); }

inline tailforce::TailPlanform water_tail(double l = 0.02) {
  return {l, 50.8e-6, 0.694, 998.0};
}

struct Model {
  tailforce::CenterlineSequence cl;
  tailforce::FrameField frames;
  tailforce::KinematicField kin;
  tailforce::ForceTrace trace;
};

inline Model run(const tailforce::WaveParams& p, double l, std::size_t n_s,
                 std::size_t steps_per_period, std::size_t periods,
                 const tailforce::TailPlanform& planform) {
  using namespace tailforce;
  const double period = p.omega > 0.0 ? p.period() : 1.0;
  const double dt = period / static_cast<double>(steps_per_period);
  const auto times = uniform_times(steps_per_period * periods + 1, dt);
  auto cl = generate_wave(p, ArcGrid(n_s, l), times);
  auto frames = compute_frames(cl);
  auto kin = compute_kinematics(cl, frames);
  auto trace = reactive_force(kin, frames, planform);
  return Model{std::move(cl), std::move(frames), std::move(kin), std::move(trace)};
}

inline tailforce::WaveParams standing(double eps, double omega) {
  tailforce::WaveParams p;
  p.mode = tailforce::WaveMode::standing;
  p.a1 = eps;
  p.omega = omega;
  return p;
}

inline tailforce::WaveParams rigid(double A, double omega) {
  tailforce::WaveParams p;
  p.mode = tailforce::WaveMode::rigid_translation;
  p.a0 = A;
  p.omega = omega;
  return p;
}

inline tailforce::WaveParams traveling(double a0, double k, double omega) {
  tailforce::WaveParams p;
  p.mode = tailforce::WaveMode::traveling;
  p.a0 = a0;
  p.k = k;
  p.omega = omega;
  return p;
}

// Spike-train force emulating a measured 1 Hz propulsor trace: in every
// period, a half-sine spike of height `peak` and width `spike_width` starting
// at `spike_start`, then a half-sine trough of depth `trough` and width
// `trough_width` starting at `trough_start`.
struct SpikeTrain {
  double period = 1.0;
  double peak = 0.48e-3;
  double spike_start = 0.1;
  double spike_width = 0.08;
  double trough = 8e-6;
  double trough_start = 0.3;
  double trough_width = 0.4;

  double operator()(double t) const {
    const double tau = t - period * std::floor(t / period);
    if (tau >= spike_start && tau < spike_start + spike_width)
      return peak * std::sin(kPi * (tau - spike_start) / spike_width);
    if (tau >= trough_start && tau < trough_start + trough_width)
      return -trough * std::sin(kPi * (tau - trough_start) / trough_width);
    return 0.0;
  }

  // Closed-form cycle average: integral of a half-sine is 2 A w / pi.
  double cycle_average() const {
    return (2.0 * peak * spike_width / kPi - 2.0 * trough * trough_width / kPi) / period;
  }
  double cycle_peak() const { return peak; }
};

inline tailforce::TimeSeries sample(const SpikeTrain& g, double duration, double rate) {
  tailforce::TimeSeries ts{rate, 0.0, {}};
  const auto n = static_cast<std::size_t>(std::llround(duration * rate));
  for (std::size_t i = 0; i < n; ++i) ts.samples.push_back(g(static_cast<double>(i) / rate));
  return ts;
}

inline tailforce::TimeSeries sinusoid(double freq, double amp, double duration, double rate,
                                      double phase = 0.0) {
  tailforce::TimeSeries ts{rate, 0.0, {}};
  const auto n = static_cast<std::size_t>(std::llround(duration * rate));
  for (std::size_t i = 0; i < n; ++i)
    ts.samples.push_back(amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) / rate + phase));
  return ts;
}

// Least-squares amplitude of a sinusoid at freq over samples [first, last).
inline double fitted_amplitude(const tailforce::TimeSeries& ts, double freq,
                               std::size_t first, std::size_t last) {
  double ss = 0, sc = 0, cc = 0, ys = 0, yc = 0;
  for (std::size_t i = first; i < last; ++i) {
    const double w = 2.0 * kPi * freq * ts.time(i);
    const double s = std::sin(w), c = std::cos(w);
    ss += s * s;
    sc += s * c;
    cc += c * c;
    ys += ts.samples[i] * s;
    yc += ts.samples[i] * c;
  }
  const double det = ss * cc - sc * sc;
  const double a = (ys * cc - yc * sc) / det;
  const double b = (yc * ss - ys * sc) / det;
  return std::hypot(a, b);
}

// Lag in [-max_lag, max_lag] maximizing sum x[i] y[i + lag] over the interior.
inline long xcorr_peak_lag(const std::vector<double>& x, const std::vector<double>& y,
                           long max_lag, std::size_t margin) {
  long best = 0;
  double best_v = -1e300;
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t i = margin; i + margin < x.size(); ++i)
      acc += x[i] * y[static_cast<std::size_t>(static_cast<long>(i) + lag)];
    if (acc > best_v) {
      best_v = acc;
      best = lag;
    }
  }
  return best;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tailforce_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
