#pragma once

// Reactive (added-mass) force model for a thin undulating tail.
//
// Forces are returned exactly as the b1/b2 components of
//   F_r(t) = -integral_0^l m(s) (dv_n/dt + v_t dv_n/ds) u_n ds,
// i.e. negative F_th points along -b1, the direction of locomotion.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tailforce/error.hpp"
#include "tailforce/field.hpp"
#include "tailforce/kinematics.hpp"

namespace tailforce {

/// Parabolic tail planform h(s) = c_h sqrt(l - s), with c_h in mm^(1/2)
/// (h and l - s in millimetres). Everything else SI.
struct TailPlanform {
  double length = 0.02;     // l [m]
  double thickness = 50.8e-6;  // beta [m]
  double c_h = 0.694;       // [mm^0.5]
  double rho = 998.0;       // [kg/m^3]

  void validate() const {
    if (!(length > 0.0) || !(thickness > 0.0) || !(c_h > 0.0) || !(rho > 0.0))
      throw Error("TailPlanform: length, thickness, c_h and rho must be positive");
  }
};

/// Local tail height h(s) [m].
inline double tail_height(const TailPlanform& p, double s) {
  const double remaining = std::max(0.0, p.length - s);
  return p.c_h * 1e-3 * std::sqrt(1000.0 * remaining);
}

/// Added mass per unit length m(s) = 2 rho beta h(s) [kg/m].
inline double added_mass(const TailPlanform& p, double s) {
  p.validate();
  if (!(s >= 0.0) || s > p.length * (1.0 + 1e-12))
    throw Error("added_mass: s = " + std::to_string(s) + " outside [0, " +
                std::to_string(p.length) + "]");
  return 2.0 * p.rho * p.thickness * tail_height(p, s);
}

/// Quadrature weights w_i with sum_i w_i g(s_i) = integral m(s) g(s) ds for g
/// piecewise linear on the grid. The sqrt(l - s) factor of m is integrated
/// exactly, so the rule stays second order despite the singular slope at the
/// tip.
inline std::vector<double> added_mass_weights(const TailPlanform& p,
                                              const ArcGrid& grid) {
  p.validate();
  if (std::abs(grid.length() - p.length) > 1e-9 * p.length)
    throw Error("added_mass_weights: arc grid length does not match planform");
  // m(s) = C sqrt(l - s) with s in metres.
  const double C = 2.0 * p.rho * p.thickness * p.c_h * 1e-3 * std::sqrt(1000.0);
  const double l = grid.length();
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    const double a = grid.s(j), b = grid.s(j + 1), h = b - a;
    const double ua = l - a, ub = std::max(0.0, l - b);
    const double p32 = std::pow(ua, 1.5) - std::pow(ub, 1.5);
    const double p52 = std::pow(ua, 2.5) - std::pow(ub, 2.5);
    const double left = (0.4 * p52 - ub * (2.0 / 3.0) * p32) / h;
    const double right = (ua * (2.0 / 3.0) * p32 - 0.4 * p52) / h;
    w[j] += C * left;
    w[j + 1] += C * right;
  }
  return w;
}

struct ForceTrace {
  std::vector<double> times;
  std::vector<double> F_th;   // b1 component [N]
  std::vector<double> F_lat;  // b2 component [N]
};

namespace detail {

inline void require_finite(const ScalarField& f, const char* name) {
  for (std::size_t i = 0; i < f.n_t(); ++i)
    for (std::size_t j = 0; j < f.n_s(); ++j)
      if (!std::isfinite(f(i, j)))
        throw Error(std::string("non-finite ") + name + " at frame " +
                    std::to_string(i) + ", sample " + std::to_string(j));
}

inline void require_finite(const VectorField& f, const char* name) {
  for (std::size_t i = 0; i < f.n_t(); ++i)
    for (std::size_t j = 0; j < f.n_s(); ++j)
      if (!std::isfinite(f(i, j).x) || !std::isfinite(f(i, j).y))
        throw Error(std::string("non-finite ") + name + " at frame " +
                    std::to_string(i) + ", sample " + std::to_string(j));
}

}  // namespace detail

inline ForceTrace reactive_force(const KinematicField& kin, const FrameField& frames,
                                 const TailPlanform& planform) {
  const std::size_t n_t = kin.times.size(), n_s = kin.grid.size();
  if (!frames.u_n.same_shape(n_t, n_s) || !kin.dvn_dt.same_shape(n_t, n_s) ||
      !kin.dvn_ds.same_shape(n_t, n_s) || !kin.v_t.same_shape(n_t, n_s))
    throw Error("reactive_force: kinematic and frame fields do not share grids");
  detail::require_finite(kin.dvn_dt, "dvn_dt");
  detail::require_finite(kin.dvn_ds, "dvn_ds");
  detail::require_finite(kin.v_t, "v_t");
  detail::require_finite(frames.u_n, "u_n");

  const std::vector<double> w = added_mass_weights(planform, kin.grid);
  ForceTrace out{kin.times, std::vector<double>(n_t), std::vector<double>(n_t)};
  for (std::size_t i = 0; i < n_t; ++i) {
    double fx = 0.0, fy = 0.0;
    for (std::size_t j = 0; j < n_s; ++j) {
      const double accel = kin.dvn_dt(i, j) + kin.v_t(i, j) * kin.dvn_ds(i, j);
      fx += w[j] * accel * frames.u_n(i, j).x;
      fy += w[j] * accel * frames.u_n(i, j).y;
    }
    out.F_th[i] = -fx;
    out.F_lat[i] = -fy;
  }
  return out;
}

/// Time average of a sampled signal over the largest whole number of periods
/// starting at times.front(). Trapezoidal; the closing point is linearly
/// interpolated when it falls between samples.
inline double cycle_average(std::span<const double> times,
                            std::span<const double> values, double period) {
  if (!(period > 0.0)) throw Error("cycle_average: period must be positive");
  if (times.size() != values.size() || times.size() < 2)
    throw Error("cycle_average: need >= 2 samples with matching times");
  const double t0 = times.front();
  const double span = times.back() - t0;
  const auto cycles = static_cast<long>(std::floor(span / period + 1e-9));
  if (cycles < 1)
    throw Error("cycle_average: trace spans " + std::to_string(span) +
                " s, shorter than one period of " + std::to_string(period) + " s");
  const double t_end = std::min(t0 + static_cast<double>(cycles) * period, times.back());

  double integral = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double ta = times[i - 1], tb = times[i];
    if (ta >= t_end) break;
    if (tb <= t_end) {
      integral += 0.5 * (values[i - 1] + values[i]) * (tb - ta);
    } else {
      const double frac = (t_end - ta) / (tb - ta);
      const double v_end = values[i - 1] + frac * (values[i] - values[i - 1]);
      integral += 0.5 * (values[i - 1] + v_end) * (t_end - ta);
    }
  }
  return integral / (t_end - t0);
}

inline double cycle_average_thrust(const ForceTrace& trace, double period) {
  return cycle_average(trace.times, trace.F_th, period);
}

/// Cycle-averaged power carried by the wave at each arc sample,
/// P_w(s) = 1/2 m(s) <v_n^2> v_w [W].
inline std::vector<double> wave_power(const KinematicField& kin,
                                      const TailPlanform& planform, double v_w,
                                      double period) {
  if (!(v_w > 0.0)) throw Error("wave_power: wave speed must be positive");
  planform.validate();
  const std::size_t n_t = kin.times.size(), n_s = kin.grid.size();
  std::vector<double> column(n_t), out(n_s);
  for (std::size_t j = 0; j < n_s; ++j) {
    for (std::size_t i = 0; i < n_t; ++i) column[i] = kin.v_n(i, j) * kin.v_n(i, j);
    const double mean_sq = cycle_average(kin.times, column, period);
    out[j] = 0.5 * added_mass(planform, kin.grid.s(j)) * mean_sq * v_w;
  }
  return out;
}

struct AccelField {
  ScalarField a_n;
  ScalarField a_t;
};

namespace detail {

inline double wrap_angle(double a) {
  return std::remainder(a, 2.0 * std::numbers::pi);
}

// Derivative of an angle field along one axis, tolerant of +-pi wrapping.
inline ScalarField angle_derivative(const ScalarField& theta, double h, bool along_time) {
  ScalarField out(theta.n_t(), theta.n_s());
  for (std::size_t i = 0; i < theta.n_t(); ++i)
    for (std::size_t j = 0; j < theta.n_s(); ++j) {
      const double centre = theta(i, j);
      if (along_time) {
        out(i, j) = fd::derivative_at(
            [&](std::size_t k) { return centre + wrap_angle(theta(k, j) - centre); },
            theta.n_t(), i, h);
      } else {
        out(i, j) = fd::derivative_at(
            [&](std::size_t k) { return centre + wrap_angle(theta(i, k) - centre); },
            theta.n_s(), j, h);
      }
    }
  return out;
}

}  // namespace detail

/// Normal and tangential acceleration of the fluid parcel next to the tail,
/// including the convective terms carried by the slip velocity v_t.
inline AccelField material_acceleration(const KinematicField& kin,
                                        const FrameField& frames) {
  const std::size_t n_t = kin.times.size(), n_s = kin.grid.size();
  if (!frames.theta.same_shape(n_t, n_s) || !kin.v_n.same_shape(n_t, n_s) ||
      !kin.v_t.same_shape(n_t, n_s) || !kin.dvn_dt.same_shape(n_t, n_s) ||
      !kin.dvn_ds.same_shape(n_t, n_s))
    throw Error("material_acceleration: field shape mismatch");

  const double ds = kin.grid.spacing();
  const ScalarField dth_dt = detail::angle_derivative(frames.theta, kin.dt, true);
  const ScalarField dth_ds = detail::angle_derivative(frames.theta, ds, false);
  const ScalarField dvt_dt = fd::along_t(kin.v_t, kin.dt);
  const ScalarField dvt_ds = fd::along_s(kin.v_t, ds);

  AccelField a{ScalarField(n_t, n_s), ScalarField(n_t, n_s)};
  for (std::size_t i = 0; i < n_t; ++i)
    for (std::size_t j = 0; j < n_s; ++j) {
      const double vt = kin.v_t(i, j), vn = kin.v_n(i, j);
      const double Dvn = kin.dvn_dt(i, j) + vt * kin.dvn_ds(i, j);
      const double Dvt = dvt_dt(i, j) + vt * dvt_ds(i, j);
      a.a_n(i, j) = Dvn + vt * dth_dt(i, j) + vt * vt * dth_ds(i, j);
      a.a_t(i, j) = Dvt - vn * dth_dt(i, j) - vn * vt * dth_ds(i, j);
    }
  return a;
}

}  // namespace tailforce
