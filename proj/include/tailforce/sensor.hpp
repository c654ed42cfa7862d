#pragma once

// Dual-cantilever force sensor: lumped stiffness and frequency response,
// step-response simulation, and static voltage-force calibration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tailforce/error.hpp"
#include "tailforce/time_series.hpp"

namespace tailforce::sensor {

inline constexpr double kInvar36Modulus = 141e9;     // [Pa], handbook value
inline constexpr double kHystereticLoss = 0.007;     // Invar-36
inline constexpr double kReferenceNaturalFrequency = 288.0;  // [Hz]
inline constexpr double kResolution = 0.274e-6;      // [N], reported, not derived
inline constexpr double kRange = 6.85e-3;            // [N], symmetric +-

/// Geometry and material of the two clamped-clamped beams. m_tot is the
/// lumped equivalent mass.
struct DcsDesign {
  double E = kInvar36Modulus;  // [Pa]
  double w = 3e-3;             // beam width [m]
  double d = 0.153e-3;         // material thickness [m]
  double l_b = 16e-3;          // beam length [m]
  double eta = kHystereticLoss;
  double m_tot = 0.0;          // [kg]

  void validate() const {
    for (double v : {E, w, d, l_b, eta, m_tot})
      if (!(v > 0.0) || !std::isfinite(v))
        throw Error("DcsDesign: E, w, d, l_b, eta and m_tot must all be positive");
  }
};

inline double second_moment(const DcsDesign& d) { return d.w * d.d * d.d * d.d / 12.0; }

/// k_tot = 24 E I / l_b^3 [N/m].
inline double stiffness(const DcsDesign& d) {
  d.validate();
  return 24.0 * d.E * second_moment(d) / (d.l_b * d.l_b * d.l_b);
}

inline double natural_frequency_rad(const DcsDesign& d) {
  return std::sqrt(stiffness(d) / d.m_tot);
}
inline double natural_frequency_hz(const DcsDesign& d) {
  return natural_frequency_rad(d) / (2.0 * std::numbers::pi);
}

/// Returns a copy of the design with m_tot chosen so that f_n = target_hz.
inline DcsDesign with_natural_frequency(DcsDesign d, double target_hz) {
  if (!(target_hz > 0.0)) throw Error("target natural frequency must be positive");
  d.m_tot = 1.0;
  const double wn = 2.0 * std::numbers::pi * target_hz;
  d.m_tot = stiffness(d) / (wn * wn);
  return d;
}

/// The fabricated geometry tuned to the reported 288 Hz natural frequency.
inline DcsDesign reference_design() {
  return with_natural_frequency(DcsDesign{}, kReferenceNaturalFrequency);
}

/// |delta(w0)| / |delta(0)| as a function of r = w0 / w_n and eta only.
inline double normalized_response_ratio(double r, double eta) {
  const double q = 1.0 - r * r;
  return std::sqrt((1.0 + eta * eta) / (eta * eta + q * q));
}

/// Steady-state deflection amplitude under a harmonic force F0 sin(w0 t).
inline double magnitude_response(const DcsDesign& d, double F0, double omega0) {
  if (!(omega0 >= 0.0)) throw Error("magnitude_response: omega0 must be >= 0");
  const double k = stiffness(d);
  const double r = omega0 / natural_frequency_rad(d);
  const double q = 1.0 - r * r;
  return F0 / (k * std::sqrt(d.eta * d.eta + q * q));
}

inline double normalized_response(const DcsDesign& d, double omega0) {
  if (!(omega0 >= 0.0)) throw Error("normalized_response: omega0 must be >= 0");
  return normalized_response_ratio(omega0 / natural_frequency_rad(d), d.eta);
}

/// Highest frequency [Hz] below which the normalized response stays within
/// 1 + max_rel_error. Bisection on (0, f_n), where the response is monotone.
inline double bandwidth_for_error(const DcsDesign& d, double max_rel_error) {
  d.validate();
  if (!(max_rel_error > 0.0))
    throw Error("bandwidth_for_error: error bound must be positive");
  const double peak = normalized_response_ratio(1.0, d.eta);
  if (1.0 + max_rel_error >= peak)
    throw Error("bandwidth_for_error: tolerance " + std::to_string(max_rel_error) +
                " is never exceeded below resonance (peak response " +
                std::to_string(peak) + ")");
  const double fn = natural_frequency_hz(d);
  double lo = 0.0, hi = fn;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * fn; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (normalized_response_ratio(mid / fn, d.eta) - 1.0 <= max_rel_error)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

/// Step response read out through a displacement probe of gain [V/m].
/// The transient is the underdamped 2nd-order response with zeta = eta / 2.
inline TimeSeries simulate_step_response(const DcsDesign& d, double F_step,
                                         double duration, double rate,
                                         double noise_sd, double gain,
                                         std::uint64_t seed = 0) {
  d.validate();
  const double fn = natural_frequency_hz(d);
  if (!(rate >= 4.0 * fn))
    throw Error("simulate_step_response: rate " + std::to_string(rate) +
                " Hz undersamples the " + std::to_string(fn) + " Hz transient");
  if (!(duration > 0.0)) throw Error("simulate_step_response: duration must be positive");
  if (!(noise_sd >= 0.0)) throw Error("simulate_step_response: noise_sd must be >= 0");

  const double wn = 2.0 * std::numbers::pi * fn;
  const double zeta = 0.5 * d.eta;
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);
  const double steady = gain * F_step / stiffness(d);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto n = static_cast<std::size_t>(std::llround(duration * rate)) + 1;
  TimeSeries out{rate, 0.0, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double env = std::exp(-zeta * wn * t);
    const double x = 1.0 - env * (std::cos(wd * t) +
                                  zeta / std::sqrt(1.0 - zeta * zeta) * std::sin(wd * t));
    out.samples[i] = steady * x + (noise_sd > 0.0 ? noise_sd * noise(rng) : 0.0);
  }
  return out;
}

struct CalibrationLevel {
  double force = 0.0;  // [N]
  std::vector<double> voltages;  // repeated steady-state readings [V]
};

struct CalibrationRecord {
  std::vector<CalibrationLevel> levels;
};

struct LevelStats {
  double force = 0.0;
  double mean = 0.0;
  double esd = 0.0;  // sample standard deviation (n - 1)
  std::size_t n = 0;
};

struct CalibrationFit {
  double slope = 0.0;      // [V/N]
  double intercept = 0.0;  // [V]
  double r_squared = 0.0;
  std::vector<LevelStats> levels;
};

namespace detail {

inline LevelStats level_stats(const CalibrationLevel& lv) {
  LevelStats st{lv.force, 0.0, 0.0, lv.voltages.size()};
  for (double v : lv.voltages) st.mean += v;
  st.mean /= static_cast<double>(st.n);
  if (st.n > 1) {
    double ss = 0.0;
    for (double v : lv.voltages) ss += (v - st.mean) * (v - st.mean);
    st.esd = std::sqrt(ss / static_cast<double>(st.n - 1));
  }
  return st;
}

}  // namespace detail

/// Ordinary least squares of per-level mean voltage against applied force.
inline CalibrationFit fit_calibration(const CalibrationRecord& rec) {
  if (rec.levels.size() < 2)
    throw Error("fit_calibration: need at least 2 force levels");
  CalibrationFit fit;
  for (const auto& lv : rec.levels) {
    if (lv.voltages.empty())
      throw Error("fit_calibration: force level " + std::to_string(lv.force) +
                  " N has no readings");
    if (!std::isfinite(lv.force))
      throw Error("fit_calibration: non-finite force level");
    fit.levels.push_back(detail::level_stats(lv));
  }

  const double n = static_cast<double>(fit.levels.size());
  double fx = 0.0, fy = 0.0;
  for (const auto& st : fit.levels) {
    fx += st.force;
    fy += st.mean;
  }
  fx /= n;
  fy /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& st : fit.levels) {
    sxx += (st.force - fx) * (st.force - fx);
    sxy += (st.force - fx) * (st.mean - fy);
    syy += (st.mean - fy) * (st.mean - fy);
  }
  if (!(sxx > 0.0)) throw Error("fit_calibration: all force levels identical (singular fit)");
  fit.slope = sxy / sxx;
  fit.intercept = fy - fit.slope * fx;

  double ss_res = 0.0;
  for (const auto& st : fit.levels) {
    const double r = st.mean - (fit.intercept + fit.slope * st.force);
    ss_res += r * r;
  }
  if (syy > 0.0)
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  else
    fit.r_squared = ss_res == 0.0 ? 1.0 : 0.0;
  return fit;
}

/// F = (V - intercept) / slope, elementwise.
inline TimeSeries voltage_to_force(const CalibrationFit& fit, const TimeSeries& volts) {
  if (fit.slope == 0.0 || !std::isfinite(fit.slope))
    throw Error("voltage_to_force: calibration slope is zero");
  TimeSeries out{volts.rate, volts.start, std::vector<double>(volts.size())};
  for (std::size_t i = 0; i < volts.size(); ++i)
    out.samples[i] = (volts.samples[i] - fit.intercept) / fit.slope;
  return out;
}

inline TimeSeries force_to_voltage(const CalibrationFit& fit, const TimeSeries& force) {
  TimeSeries out{force.rate, force.start, std::vector<double>(force.size())};
  for (std::size_t i = 0; i < force.size(); ++i)
    out.samples[i] = fit.intercept + fit.slope * force.samples[i];
  return out;
}

}  // namespace tailforce::sensor
