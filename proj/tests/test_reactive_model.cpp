#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "tailforce/reactive_model.hpp"

using namespace tailforce;
using fixtures::kPi;

TEST(AddedMass, VanishesAtTip) {
  const auto p = fixtures::water_tail();
  EXPECT_EQ(added_mass(p, p.length), 0.0);
}

TEST(AddedMass, RootValueUnderMillimetreConvention) {
  // h(0) = 0.694 sqrt(20) mm = 3.104 mm; m(0) = 2 * 998 * 50.8e-6 * 3.104e-3.
  const auto p = fixtures::water_tail();
  EXPECT_NEAR(tail_height(p, 0.0), 3.1037e-3, 1e-7);
  const double hand = 2.0 * 998.0 * 50.8e-6 * (0.694 * std::sqrt(20.0) * 1e-3);
  EXPECT_NEAR(added_mass(p, 0.0), hand, 1e-18);
  EXPECT_NEAR(added_mass(p, 0.0), 3.147e-4, 1e-7);
}

TEST(AddedMass, LinearInThicknessAndMonotone) {
  auto p = fixtures::water_tail();
  auto q = p;
  q.thickness *= 2.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 20; ++i) {
    const double s = p.length * i / 20.0;
    EXPECT_DOUBLE_EQ(added_mass(q, s), 2.0 * added_mass(p, s));
    EXPECT_LE(added_mass(p, s), prev);
    prev = added_mass(p, s);
  }
}

TEST(AddedMass, DomainErrors) {
  const auto p = fixtures::water_tail();
  EXPECT_THROW(added_mass(p, -1e-6), Error);
  EXPECT_THROW(added_mass(p, 0.021), Error);
  auto bad = p;
  bad.rho = 0.0;
  EXPECT_THROW(added_mass(bad, 0.0), Error);
}

TEST(AddedMassWeights, IntegrateClosedFormMoments) {
  const auto p = fixtures::water_tail();
  const double C = fixtures::mass_coefficient(p.rho, p.thickness);
  for (std::size_t n : {3u, 11u, 101u}) {
    const ArcGrid grid(n, p.length);
    const auto w = added_mass_weights(p, grid);
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      m0 += w[j];
      m1 += w[j] * grid.s(j);
    }
    // Exact for integrands linear in s.
    EXPECT_NEAR(m0, fixtures::integral_m(C, p.length), 1e-13 * m0);
    EXPECT_NEAR(m1, fixtures::integral_m_s(C, p.length), 1e-13 * m1);
  }
  EXPECT_THROW(added_mass_weights(p, ArcGrid(11, 0.03)), Error);
}

TEST(ReactiveForce, StaticTailGivesZero) {
  WaveParams p;
  p.mode = WaveMode::rigid_translation;
  const auto m = fixtures::run(p, 0.02, 21, 20, 1, fixtures::water_tail());
  for (std::size_t i = 0; i < m.trace.times.size(); ++i) {
    EXPECT_NEAR(m.trace.F_th[i], 0.0, 1e-20);
    EXPECT_NEAR(m.trace.F_lat[i], 0.0, 1e-20);
  }
}

TEST(ReactiveForce, RigidLateralOscillationClosedForm) {
  const double A = 1e-3, w = 2 * kPi;
  const auto planform = fixtures::water_tail();
  const auto m = fixtures::run(fixtures::rigid(A, w), 0.02, 41, 400, 1, planform);
  const double mass = fixtures::integral_m(fixtures::mass_coefficient(998.0, 50.8e-6), 0.02);
  const double amp = A * w * w * mass;
  // Skip the frames next to the ends, where one-sided time stencils feed in.
  for (std::size_t i = 2; i + 2 < m.trace.times.size(); ++i) {
    EXPECT_NEAR(m.trace.F_th[i], 0.0, 1e-12 * amp);
    EXPECT_NEAR(m.trace.F_lat[i], amp * std::sin(w * m.trace.times[i]), 1e-3 * amp);
  }
}

TEST(ReactiveForce, StandingWaveSmallAngleOracle) {
  const double eps = 0.05, w = 2 * kPi;
  const auto planform = fixtures::water_tail();
  const auto m = fixtures::run(fixtures::standing(eps, w), 0.02, 81, 400, 1, planform);
  const double ms = fixtures::integral_m_s(fixtures::mass_coefficient(998.0, 50.8e-6), 0.02);
  const double scale = eps * eps * w * w * ms;
  for (std::size_t i = 1; i + 1 < m.trace.times.size(); ++i) {
    const double st = std::sin(w * m.trace.times[i]);
    EXPECT_NEAR(m.trace.F_th[i], -scale * st * st, 0.02 * scale);
  }
}

TEST(ReactiveForce, NonFiniteInputIsLocated) {
  const auto planform = fixtures::water_tail();
  auto m = fixtures::run(fixtures::rigid(1e-3, 2 * kPi), 0.02, 11, 20, 1, planform);
  m.kin.dvn_dt(3, 4) = std::numeric_limits<double>::quiet_NaN();
  try {
    reactive_force(m.kin, m.frames, planform);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("frame 3, sample 4"), std::string::npos) << e.what();
  }
}

TEST(ReactiveForce, SlipFreeReductionAndConvectiveTerm) {
  const auto planform = fixtures::water_tail();
  auto m = fixtures::run(fixtures::traveling(2e-4, 157.0, 2 * kPi), 0.02, 41, 100, 1, planform);
  // v_t = 0: only the unsteady term, computed here by direct summation.
  const auto w = added_mass_weights(planform, m.kin.grid);
  for (std::size_t i = 0; i < m.trace.times.size(); ++i) {
    double fx = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j)
      fx += w[j] * m.kin.dvn_dt(i, j) * m.frames.u_n(i, j).x;
    EXPECT_EQ(m.trace.F_th[i], -fx);
  }
  // A uniform slip adds exactly c * dvn_ds to the integrand.
  m.kin.v_t = ScalarField(m.kin.times.size(), m.kin.grid.size(), 0.01);
  const auto with_slip = reactive_force(m.kin, m.frames, planform);
  for (std::size_t i = 0; i < m.trace.times.size(); ++i) {
    double fx = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j)
      fx += w[j] * (m.kin.dvn_dt(i, j) + 0.01 * m.kin.dvn_ds(i, j)) * m.frames.u_n(i, j).x;
    EXPECT_DOUBLE_EQ(with_slip.F_th[i], -fx);
  }
}

TEST(CycleAverage, ConstantAndSinusoid) {
  const auto t = uniform_times(1001, 0.002);
  std::vector<double> c(t.size(), 0.37), s(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) s[i] = 2.5 * std::sin(2 * kPi * t[i]);
  EXPECT_NEAR(cycle_average(t, c, 1.0), 0.37, 1e-13);
  EXPECT_NEAR(cycle_average(t, s, 1.0), 0.0, 1e-12 * 2.5);
}

TEST(CycleAverage, TruncatesPartialTrailingPeriod) {
  // 1.5 periods of 1 + sin: only the first period counts.
  const auto t = uniform_times(1501, 0.001);
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = 1.0 + std::sin(2 * kPi * t[i]);
  EXPECT_NEAR(cycle_average(t, v, 1.0), 1.0, 1e-12);
  // Period not a multiple of dt: closing point interpolated.
  EXPECT_NEAR(cycle_average(t, v, 1.0 / 1.5 * 1.5), 1.0, 1e-12);
}

TEST(CycleAverage, RejectsShortTrace) {
  const auto t = uniform_times(11, 0.05);
  const std::vector<double> v(t.size(), 1.0);
  EXPECT_THROW(cycle_average(t, v, 1.0), Error);
  EXPECT_THROW(cycle_average(t, v, 0.0), Error);
}

TEST(CycleAverageThrust, StandingWaveMean) {
  const double eps = 0.05, w = 2 * kPi;
  const auto m = fixtures::run(fixtures::standing(eps, w), 0.02, 81, 400, 2,
                               fixtures::water_tail());
  const double ms = fixtures::integral_m_s(fixtures::mass_coefficient(998.0, 50.8e-6), 0.02);
  const double oracle = -0.5 * eps * eps * w * w * ms;
  EXPECT_NEAR(cycle_average_thrust(m.trace, 1.0), oracle, 0.02 * std::abs(oracle));
}

TEST(WavePower, StaticAndTip) {
  const auto planform = fixtures::water_tail();
  WaveParams still;
  still.mode = WaveMode::rigid_translation;
  const auto s0 = fixtures::run(still, 0.02, 11, 20, 1, planform);
  for (double v : wave_power(s0.kin, planform, 0.1, 1.0)) EXPECT_NEAR(v, 0.0, 1e-30);

  const auto m = fixtures::run(fixtures::traveling(2e-4, 157.0, 2 * kPi), 0.02, 21, 100, 1,
                               planform);
  const auto pw = wave_power(m.kin, planform, 0.04, 1.0);
  EXPECT_EQ(pw.back(), 0.0);
  EXPECT_GT(pw.front(), 0.0);
  EXPECT_THROW(wave_power(m.kin, planform, 0.0, 1.0), Error);
}

TEST(WavePower, RigidOscillationHandEvaluation) {
  const double A = 1e-3, w = 2 * kPi, v_w = 0.1;
  const auto planform = fixtures::water_tail();
  const auto m = fixtures::run(fixtures::rigid(A, w), 0.02, 11, 400, 1, planform);
  const auto pw = wave_power(m.kin, planform, v_w, 1.0);
  const double C = fixtures::mass_coefficient(998.0, 50.8e-6);
  for (std::size_t j = 0; j < pw.size(); ++j) {
    const double mass = C * std::sqrt(0.02 - m.kin.grid.s(j));
    const double hand = 0.5 * mass * (A * w) * (A * w) / 2.0 * v_w;
    EXPECT_NEAR(pw[j], hand, 1e-3 * hand + 1e-30);
  }
}

TEST(MaterialAcceleration, SlipFreeReduction) {
  const auto m = fixtures::run(fixtures::traveling(2e-4, 157.0, 2 * kPi), 0.02, 41, 100, 1,
                               fixtures::water_tail());
  const auto a = material_acceleration(m.kin, m.frames);
  for (std::size_t i = 0; i < m.kin.times.size(); ++i)
    for (std::size_t j = 0; j < m.kin.grid.size(); ++j)
      EXPECT_EQ(a.a_n(i, j), m.kin.dvn_dt(i, j));
}

TEST(MaterialAcceleration, StaticTail) {
  WaveParams p;
  p.mode = WaveMode::rigid_translation;
  const auto m = fixtures::run(p, 0.02, 11, 20, 1, fixtures::water_tail());
  const auto a = material_acceleration(m.kin, m.frames);
  for (double v : a.a_n.values()) EXPECT_NEAR(v, 0.0, 1e-12);
  for (double v : a.a_t.values()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(MaterialAcceleration, UniformSlipOnRigidOscillation) {
  auto m = fixtures::run(fixtures::rigid(1e-3, 2 * kPi), 0.02, 11, 100, 1,
                         fixtures::water_tail());
  const double c = 0.02;
  m.kin.v_t = ScalarField(m.kin.times.size(), m.kin.grid.size(), c);
  const auto a = material_acceleration(m.kin, m.frames);
  // theta = 0 and v_t constant: a_t = -v_n dtheta/dt = 0, a_n = dv_n/dt + c dv_n/ds.
  for (std::size_t i = 0; i < m.kin.times.size(); ++i)
    for (std::size_t j = 0; j < m.kin.grid.size(); ++j) {
      const double scale = std::abs(m.kin.dvn_dt(i, j)) + 1e-3;
      EXPECT_NEAR(a.a_t(i, j), 0.0, 1e-12 * scale);
      EXPECT_NEAR(a.a_n(i, j), m.kin.dvn_dt(i, j) + c * m.kin.dvn_ds(i, j), 1e-12 * scale);
      EXPECT_NEAR(a.a_n(i, j), m.kin.dvn_dt(i, j), 1e-12 * scale);
    }
}

TEST(MaterialAcceleration, ShapeMismatch) {
  auto m = fixtures::run(fixtures::rigid(1e-3, 2 * kPi), 0.02, 11, 20, 1,
                         fixtures::water_tail());
  m.kin.v_t = ScalarField(3, 3);
  EXPECT_THROW(material_acceleration(m.kin, m.frames), Error);
}

TEST(ReactiveProperties, MirrorSymmetry) {
  const auto planform = fixtures::water_tail();
  auto p = fixtures::standing(0.05, 2 * kPi);
  p.a0 = 2e-4;
  p.k = 80.0;
  const auto m = fixtures::run(p, 0.02, 41, 100, 1, planform);
  p.a0 = -p.a0;
  p.a1 = -p.a1;
  const auto r = fixtures::run(p, 0.02, 41, 100, 1, planform);
  for (std::size_t i = 0; i < m.trace.times.size(); ++i) {
    EXPECT_NEAR(r.trace.F_th[i], m.trace.F_th[i], 1e-12 * std::abs(m.trace.F_th[i]));
    EXPECT_NEAR(r.trace.F_lat[i], -m.trace.F_lat[i], 1e-12 * std::abs(m.trace.F_lat[i]));
  }
}

TEST(ReactiveProperties, LinearInDensityAndThickness) {
  auto planform = fixtures::water_tail();
  const auto m = fixtures::run(fixtures::traveling(2e-4, 157.0, 2 * kPi), 0.02, 41, 100, 1,
                               planform);
  for (double lambda : {0.5, 1.7, 3.0}) {
    auto rho = planform;
    rho.rho *= lambda;
    auto beta = planform;
    beta.thickness *= lambda;
    const auto fr = reactive_force(m.kin, m.frames, rho);
    const auto fb = reactive_force(m.kin, m.frames, beta);
    const auto pr = wave_power(m.kin, rho, 0.04, 1.0);
    const auto p0 = wave_power(m.kin, planform, 0.04, 1.0);
    for (std::size_t i = 0; i < fr.times.size(); ++i) {
      const double ref = lambda * m.trace.F_th[i];
      EXPECT_NEAR(fr.F_th[i], ref, 1e-12 * std::abs(ref));
      EXPECT_NEAR(fb.F_th[i], ref, 1e-12 * std::abs(ref));
    }
    for (std::size_t j = 0; j < p0.size(); ++j)
      EXPECT_NEAR(pr[j], lambda * p0[j], 1e-12 * lambda * p0[j]);
  }
}

TEST(ReactiveProperties, GrowingEnvelopePropelsTowardMinusB1) {
  for (double eps : {0.01, 0.03, 0.08}) {
    const auto m = fixtures::run(fixtures::standing(eps, 2 * kPi), 0.02, 41, 200, 1,
                                 fixtures::water_tail());
    EXPECT_LT(cycle_average_thrust(m.trace, 1.0), 0.0) << "eps " << eps;
  }
}

TEST(ReactiveProperties, TravelingWaveAveragesToZero) {
  const double k = 157.0;
  for (double a0k : {0.01, 0.03, 0.05}) {
    const auto m = fixtures::run(fixtures::traveling(a0k / k, k, 2 * kPi), 0.02, 201, 200, 1,
                                 fixtures::water_tail());
    double peak = 0.0;
    for (double v : m.trace.F_th) peak = std::max(peak, std::abs(v));
    EXPECT_LE(std::abs(cycle_average_thrust(m.trace, 1.0)), 0.01 * peak) << a0k;
  }
}

TEST(ReactiveProperties, GridConvergenceOrder) {
  // Self-convergence of F_th(t) under simultaneous halving of ds and dt.
  const auto planform = fixtures::water_tail();
  auto p = fixtures::traveling(3e-4, 157.0, 2 * kPi);
  p.a1 = 0.02;
  std::vector<ForceTrace> levels;
  for (std::size_t r = 0; r < 3; ++r)
    levels.push_back(
        fixtures::run(p, 0.02, 20 * (1u << r) + 1, 40 * (1u << r), 1, planform).trace);
  auto diff = [](const ForceTrace& c, const ForceTrace& f) {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.times.size(); ++i)
      worst = std::max(worst, std::abs(c.F_th[i] - f.F_th[2 * i]));
    return worst;
  };
  const double order = std::log2(diff(levels[0], levels[1]) / diff(levels[1], levels[2]));
  EXPECT_GE(order, 1.8);
}
