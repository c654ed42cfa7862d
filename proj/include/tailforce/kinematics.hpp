#pragma once

// Tail centerline kinematics: arc-length grids, centerline sequences,
// synthetic wave generation, tangent/normal frames and velocity fields.
//
// Coordinates follow the body frame: b1 along the extended tail, b2 lateral.
// All quantities are SI.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailforce/error.hpp"
#include "tailforce/field.hpp"

namespace tailforce {

/// Default relative tolerance on |dr/ds| - 1.
inline constexpr double kArcTolerance = 1e-3;

/// Uniform Lagrangian arc-length grid s_i = i * l / (n_s - 1).
class ArcGrid {
 public:
  ArcGrid(std::size_t n_s, double length) : n_s_(n_s), length_(length) {
    if (n_s < 3) throw Error("ArcGrid: need n_s >= 3, got " + std::to_string(n_s));
    if (!(length > 0.0) || !std::isfinite(length))
      throw Error("ArcGrid: tail length must be positive and finite");
  }

  std::size_t size() const { return n_s_; }
  double length() const { return length_; }
  double spacing() const { return length_ / static_cast<double>(n_s_ - 1); }
  double s(std::size_t i) const {
    return i + 1 == n_s_ ? length_
                         : static_cast<double>(i) * length_ /
                               static_cast<double>(n_s_ - 1);
  }
  std::vector<double> values() const {
    std::vector<double> v(n_s_);
    for (std::size_t i = 0; i < n_s_; ++i) v[i] = s(i);
    return v;
  }

  bool operator==(const ArcGrid&) const = default;

 private:
  std::size_t n_s_;
  double length_;
};

/// Sampled tail centerlines r(s, t) = (x, y) on a fixed arc grid.
struct CenterlineSequence {
  ArcGrid grid;
  std::vector<double> times;
  ScalarField x;  // [n_t x n_s], b1 coordinate
  ScalarField y;  // [n_t x n_s], b2 coordinate

  std::size_t n_t() const { return times.size(); }

  void validate() const {
    if (times.empty()) throw Error("CenterlineSequence: no frames");
    if (!x.same_shape(times.size(), grid.size()) ||
        !y.same_shape(times.size(), grid.size()))
      throw Error("CenterlineSequence: array shapes do not match grid/times");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw Error("CenterlineSequence: times not strictly increasing at frame " +
                    std::to_string(i));
  }
};

/// Largest |‖dr/ds‖ - 1| over all frames and samples (finite differences).
inline double arc_length_deviation(const CenterlineSequence& cl) {
  const double ds = cl.grid.spacing();
  const ScalarField xs = fd::along_s(cl.x, ds);
  const ScalarField ys = fd::along_s(cl.y, ds);
  double worst = 0.0;
  for (std::size_t i = 0; i < cl.n_t(); ++i)
    for (std::size_t j = 0; j < cl.grid.size(); ++j)
      worst = std::max(worst, std::abs(std::hypot(xs(i, j), ys(i, j)) - 1.0));
  return worst;
}

enum class WaveMode { traveling, standing, rigid_translation };

/// Idealized undulation. Lateral deflection:
///   traveling          y = a(s) sin(k s - w t + phi0)
///   standing           y = a(s) cos(k s) sin(w t + phi0)
///   rigid_translation  y = a0 sin(w t + phi0)            (a1 must be 0)
/// with a(s) = a0 + a1 s. The root moves as x(0, t) = -U t.
struct WaveParams {
  WaveMode mode = WaveMode::traveling;
  double a0 = 0.0;       // [m]
  double a1 = 0.0;       // [-]
  double k = 0.0;        // [rad/m]
  double omega = 0.0;    // [rad/s]
  double phi0 = 0.0;     // [rad]
  double U = 0.0;        // [m/s]

  double period() const { return 2.0 * std::numbers::pi / omega; }
  double wave_speed() const { return omega / k; }
};

namespace detail {

struct Lateral {
  double y;
  double slope;  // dy/ds
};

inline Lateral lateral(const WaveParams& p, double s, double t) {
  const double a = p.a0 + p.a1 * s;
  switch (p.mode) {
    case WaveMode::traveling: {
      const double ph = p.k * s - p.omega * t + p.phi0;
      return {a * std::sin(ph), p.a1 * std::sin(ph) + a * p.k * std::cos(ph)};
    }
    case WaveMode::standing: {
      const double temporal = std::sin(p.omega * t + p.phi0);
      const double c = std::cos(p.k * s);
      const double sn = std::sin(p.k * s);
      return {a * c * temporal, (p.a1 * c - a * p.k * sn) * temporal};
    }
    case WaveMode::rigid_translation:
      return {p.a0 * std::sin(p.omega * t + p.phi0), 0.0};
  }
  return {0.0, 0.0};
}

// 4-point Gauss-Legendre on [-1, 1].
inline constexpr std::array<double, 4> kGaussNodes{
    -0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
    0.8611363115940526};
inline constexpr std::array<double, 4> kGaussWeights{
    0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
    0.3478548451374538};

}  // namespace detail

/// Samples the wave on grid x times. x is re-parameterized so the centerline
/// is inextensible: x(s,t) = -U t + integral_0^s sqrt(1 - (dy/ds)^2).
inline CenterlineSequence generate_wave(const WaveParams& p, const ArcGrid& grid,
                                        std::span<const double> times,
                                        double arc_tolerance = kArcTolerance) {
  const bool oscillates =
      p.mode != WaveMode::rigid_translation || p.a0 != 0.0;
  if (oscillates && !(p.omega > 0.0))
    throw Error("generate_wave: omega must be positive for oscillatory motion");
  if (p.mode == WaveMode::rigid_translation && p.a1 != 0.0)
    throw Error("generate_wave: rigid translation requires a1 = 0");
  for (double v : {p.a0, p.a1, p.k, p.omega, p.phi0, p.U})
    if (!std::isfinite(v)) throw Error("generate_wave: non-finite wave parameter");

  CenterlineSequence cl{grid, {times.begin(), times.end()},
                        ScalarField(times.size(), grid.size()),
                        ScalarField(times.size(), grid.size())};
  cl.validate();

  const double h = grid.spacing();
  auto stretch = [&](double s, double t, std::size_t frame) {
    const double slope = detail::lateral(p, s, t).slope;
    if (std::abs(slope) >= 1.0)
      throw Error("generate_wave: |dy/ds| = " + std::to_string(std::abs(slope)) +
                  " >= 1 at frame " + std::to_string(frame) +
                  ", s = " + std::to_string(s) +
                  " m; amplitude too large for an inextensible centerline");
    return std::sqrt(1.0 - slope * slope);
  };

  for (std::size_t i = 0; i < cl.n_t(); ++i) {
    const double t = cl.times[i];
    double x = -p.U * t;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double s = grid.s(j);
      if (j > 0) {
        const double mid = 0.5 * (grid.s(j - 1) + s);
        double acc = 0.0;
        for (std::size_t g = 0; g < 4; ++g)
          acc += detail::kGaussWeights[g] *
                 stretch(mid + 0.5 * h * detail::kGaussNodes[g], t, i);
        x += 0.5 * h * acc;
      }
      stretch(s, t, i);
      cl.x(i, j) = x;
      cl.y(i, j) = detail::lateral(p, s, t).y;
    }
  }

  const double dev = arc_length_deviation(cl);
  if (dev > arc_tolerance)
    throw Error("generate_wave: arc-length deviation " + std::to_string(dev) +
                " exceeds tolerance; refine the arc grid");
  return cl;
}

/// Uniformly spaced times t_i = t0 + i * dt, i = 0..n-1.
inline std::vector<double> uniform_times(std::size_t n, double dt, double t0 = 0.0) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = t0 + static_cast<double>(i) * dt;
  return t;
}

struct FrameField {
  ScalarField theta;  // tangent angle from b1 [rad]
  VectorField u_t;    // (cos theta, sin theta)
  VectorField u_n;    // u_t rotated by +pi/2
};

inline FrameField compute_frames(const CenterlineSequence& cl) {
  cl.validate();
  const double ds = cl.grid.spacing();
  const ScalarField xs = fd::along_s(cl.x, ds);
  const ScalarField ys = fd::along_s(cl.y, ds);

  const std::size_t n_t = cl.n_t(), n_s = cl.grid.size();
  FrameField f{ScalarField(n_t, n_s), VectorField(n_t, n_s), VectorField(n_t, n_s)};
  for (std::size_t i = 0; i < n_t; ++i)
    for (std::size_t j = 0; j < n_s; ++j) {
      if (std::hypot(xs(i, j), ys(i, j)) < 1e-12)
        throw Error("compute_frames: degenerate tangent at frame " +
                    std::to_string(i) + ", sample " + std::to_string(j));
      const double th = std::atan2(ys(i, j), xs(i, j));
      const double c = std::cos(th), s = std::sin(th);
      f.theta(i, j) = th;
      f.u_t(i, j) = {c, s};
      f.u_n(i, j) = {-s, c};
    }
  return f;
}

struct KinematicField {
  ArcGrid grid;
  std::vector<double> times;
  double dt = 0.0;
  VectorField v_b;      // centerline velocity
  ScalarField v_n;      // normal velocity (no-penetration: v_b . u_n)
  ScalarField dvn_dt;
  ScalarField dvn_ds;
  ScalarField v_t;      // tangential slip velocity of the fluid
};

/// Common step of a uniform time grid; throws if the grid is not uniform.
inline double uniform_step(std::span<const double> times, double rel_tol = 1e-6) {
  if (times.size() < 2) throw Error("uniform_step: need at least 2 samples");
  const double dt =
      (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs((times[i] - times[i - 1]) - dt) > rel_tol * dt)
      throw Error("non-uniform time grid at sample " + std::to_string(i) +
                  "; derivative stencils assume a uniform step");
  return dt;
}

inline KinematicField compute_kinematics(const CenterlineSequence& cl,
                                         const FrameField& frames,
                                         const std::optional<ScalarField>& slip = {}) {
  cl.validate();
  const std::size_t n_t = cl.n_t(), n_s = cl.grid.size();
  if (n_t < 3) throw Error("need >= 3 frames for time derivatives");
  if (!frames.theta.same_shape(n_t, n_s))
    throw Error("compute_kinematics: frame field does not match centerline");
  if (slip && !slip->same_shape(n_t, n_s))
    throw Error("compute_kinematics: slip field shape mismatch");
  const double dt = uniform_step(cl.times);

  const double ds = cl.grid.spacing();
  const ScalarField vx = fd::along_t(cl.x, dt);
  const ScalarField vy = fd::along_t(cl.y, dt);

  // Derivatives of v_n = v_b . u_n by the product rule, using
  // du_n = -u_t dtheta and dtheta = (x_s dy_s - y_s dx_s) / |r_s|^2.
  // Differencing the v_n field itself would nest two one-sided stencils and
  // drop to first order on the boundary rows.
  const ScalarField xs = fd::along_s(cl.x, ds), ys = fd::along_s(cl.y, ds);
  const ScalarField xss = fd::second_along_s(cl.x, ds), yss = fd::second_along_s(cl.y, ds);
  const ScalarField vxs = fd::along_s(vx, ds), vys = fd::along_s(vy, ds);
  const ScalarField ax = fd::second_along_t(cl.x, dt), ay = fd::second_along_t(cl.y, dt);

  KinematicField k{cl.grid, cl.times, dt, VectorField(n_t, n_s),
                   ScalarField(n_t, n_s), ScalarField(n_t, n_s), ScalarField(n_t, n_s),
                   ScalarField(n_t, n_s)};
  for (std::size_t i = 0; i < n_t; ++i)
    for (std::size_t j = 0; j < n_s; ++j) {
      const Vec2 v{vx(i, j), vy(i, j)};
      const Vec2 u_n = frames.u_n(i, j), u_t = frames.u_t(i, j);
      const double r2 = xs(i, j) * xs(i, j) + ys(i, j) * ys(i, j);
      const double theta_t = (xs(i, j) * vys(i, j) - ys(i, j) * vxs(i, j)) / r2;
      const double theta_s = (xs(i, j) * yss(i, j) - ys(i, j) * xss(i, j)) / r2;
      const double v_along = dot(v, u_t);
      k.v_b(i, j) = v;
      k.v_n(i, j) = dot(v, u_n);
      k.dvn_dt(i, j) = dot(Vec2{ax(i, j), ay(i, j)}, u_n) - theta_t * v_along;
      k.dvn_ds(i, j) = dot(Vec2{vxs(i, j), vys(i, j)}, u_n) - theta_s * v_along;
    }
  if (slip) k.v_t = *slip;
  return k;
}

}  // namespace tailforce
