#pragma once

// The three workflows behind the `tailforce` command line: model-based
// estimation (simulate, estimate), measured-trace analysis (analyze, sweep)
// and sensor design/calibration (sensor, calibrate). Each command reads
// key = value configs, writes SI files into an output directory and returns
// what it computed.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tailforce/datastore.hpp"
#include "tailforce/error.hpp"
#include "tailforce/kinematics.hpp"
#include "tailforce/reactive_model.hpp"
#include "tailforce/sensor.hpp"
#include "tailforce/sigproc.hpp"

namespace tailforce::cli {

namespace fs = std::filesystem;

struct RunOptions {
  fs::path out_dir = ".";
  std::uint64_t seed = 0;
  std::size_t n_cycles = 5;
  bool report_propulsive = false;
};

namespace detail {

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(dir.string() + ": cannot create output directory");
}

inline std::string fixed(double v, int precision) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v + 0.0;  // no "-0"
  return os.str();
}

inline std::string in_mN(double newtons) { return fixed(newtons * 1e3, 4) + " mN"; }
inline std::string in_uN(double newtons) { return fixed(newtons * 1e6, 3) + " uN"; }

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw Error(path.string() + ": write failed");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model configuration

inline WaveMode parse_mode(const std::string& s) {
  if (s == "traveling") return WaveMode::traveling;
  if (s == "standing") return WaveMode::standing;
  if (s == "rigid-translation") return WaveMode::rigid_translation;
  throw Error("unknown wave mode '" + s + "' (traveling | standing | rigid-translation)");
}

inline TailPlanform planform_from(const io::KeyValueFile& kv) {
  TailPlanform p;
  p.length = kv.get_double("length_m", p.length);
  p.thickness = kv.get_double("thickness_m", p.thickness);
  p.c_h = kv.get_double("c_h", p.c_h);
  p.rho = kv.get_double("rho", p.rho);
  p.validate();
  return p;
}

struct SimulationSetup {
  WaveParams wave;
  TailPlanform planform;
  std::size_t n_s = 201;
  std::size_t steps_per_period = 200;
  std::size_t periods = 2;
  std::optional<double> wave_speed;  // defaults to omega / k when k != 0
};

inline SimulationSetup simulation_from(const io::KeyValueFile& kv) {
  kv.reject_unknown({"mode", "a0_m", "a1", "k_rad_per_m", "f_hz", "omega_rad_s",
                     "phi0_rad", "U_m_s", "length_m", "thickness_m", "c_h", "rho",
                     "n_s", "steps_per_period", "periods", "wave_speed_m_s"});
  SimulationSetup s;
  s.wave.mode = parse_mode(kv.get_string("mode", "traveling"));
  s.wave.a0 = kv.get_double("a0_m", 0.0);
  s.wave.a1 = kv.get_double("a1", 0.0);
  s.wave.k = kv.get_double("k_rad_per_m", 0.0);
  if (kv.has("f_hz") && kv.has("omega_rad_s"))
    throw Error(kv.origin() + ": give either f_hz or omega_rad_s, not both");
  s.wave.omega = kv.has("f_hz") ? 2.0 * std::numbers::pi * kv.get_double("f_hz")
                                : kv.get_double("omega_rad_s", 2.0 * std::numbers::pi);
  s.wave.phi0 = kv.get_double("phi0_rad", 0.0);
  s.wave.U = kv.get_double("U_m_s", 0.0);
  s.planform = planform_from(kv);
  const auto n_s = kv.get_int("n_s", 201);
  const auto spp = kv.get_int("steps_per_period", 200);
  const auto per = kv.get_int("periods", 2);
  if (n_s < 3 || spp < 4 || per < 1)
    throw Error(kv.origin() + ": need n_s >= 3, steps_per_period >= 4, periods >= 1");
  s.n_s = static_cast<std::size_t>(n_s);
  s.steps_per_period = static_cast<std::size_t>(spp);
  s.periods = static_cast<std::size_t>(per);
  if (kv.has("wave_speed_m_s")) s.wave_speed = kv.get_double("wave_speed_m_s");
  if (!(s.wave.omega > 0.0)) throw Error(kv.origin() + ": frequency must be positive");
  return s;
}

struct ModelResult {
  ForceTrace trace;
  std::optional<double> mean_thrust;  // raw b1 component, <F_th>
  std::vector<double> s;
  std::vector<double> wave_power;  // empty if no wave speed
};

/// Runs kinematics -> frames -> velocities -> reactive force with v_t = 0.
inline ModelResult run_model(const CenterlineSequence& cl, const TailPlanform& planform,
                             std::optional<double> period, std::optional<double> v_w) {
  const FrameField frames = compute_frames(cl);
  const KinematicField kin = compute_kinematics(cl, frames);
  ModelResult r;
  r.trace = reactive_force(kin, frames, planform);
  r.s = cl.grid.values();
  if (period) {
    r.mean_thrust = cycle_average_thrust(r.trace, *period);
    if (v_w) r.wave_power = wave_power(kin, planform, *v_w, *period);
  }
  return r;
}

inline std::string thrust_summary(const ModelResult& r, const RunOptions& opt) {
  std::ostringstream os;
  if (r.mean_thrust) {
    const double shown = opt.report_propulsive ? -*r.mean_thrust : *r.mean_thrust;
    os << (opt.report_propulsive ? "mean propulsive thrust (-<F_th>): "
                                 : "mean thrust <F_th> (b1 component): ")
       << detail::in_uN(shown) << "  [" << io::format_number(shown + 0.0) << " N]\n";
  }
  double peak = 0.0;
  for (double v : r.trace.F_th) peak = std::max(peak, std::abs(v));
  os << "peak |F_th|: " << detail::in_mN(peak) << "\n";
  return os.str();
}

struct SimulateOutput {
  SimulationSetup setup;
  CenterlineSequence centerline;
  ModelResult model;
  double reported_mean = 0.0;  // sign per --report-propulsive
  std::string summary;
};

inline SimulateOutput cmd_simulate(const io::KeyValueFile& config, const RunOptions& opt) {
  SimulateOutput o{simulation_from(config), {ArcGrid(3, 1.0), {}, {}, {}}, {}, 0.0, {}};
  const auto& s = o.setup;
  const double period = s.wave.period();
  const ArcGrid grid(s.n_s, s.planform.length);
  const double dt = period / static_cast<double>(s.steps_per_period);
  const auto times = uniform_times(s.steps_per_period * s.periods + 1, dt);
  o.centerline = generate_wave(s.wave, grid, times);

  std::optional<double> v_w = s.wave_speed;
  if (!v_w && s.wave.k != 0.0) v_w = std::abs(s.wave.wave_speed());
  o.model = run_model(o.centerline, s.planform, period, v_w);
  o.reported_mean = (opt.report_propulsive ? -*o.model.mean_thrust : *o.model.mean_thrust) + 0.0;

  detail::ensure_dir(opt.out_dir);
  io::write_force_trace(o.model.trace, opt.out_dir / "thrust.csv");
  io::write_centerline(o.centerline, opt.out_dir / "centerline.csv");
  if (!o.model.wave_power.empty()) {
    std::ostringstream pw;
    pw << "s_m,P_w_W\n";
    for (std::size_t j = 0; j < o.model.s.size(); ++j)
      pw << io::format_number(o.model.s[j]) << ","
         << io::format_number(o.model.wave_power[j]) << "\n";
    detail::write_text(opt.out_dir / "wave_power.csv", pw.str());
  }
  o.summary = thrust_summary(o.model, opt);
  if (o.model.wave_power.empty())
    o.summary += "wave power: skipped (no wave speed; set wave_speed_m_s)\n";
  detail::write_text(opt.out_dir / "summary.txt", o.summary);
  return o;
}

struct EstimateOutput {
  ModelResult model;
  fs::path trace_path;
  std::vector<std::string> warnings;
  std::string summary;
};

/// Thrust from a measured centerline CSV with v_t = 0. The trace is written
/// next to the input unless an output directory is given.
inline EstimateOutput cmd_estimate(const fs::path& centerline_csv,
                                   const io::KeyValueFile& config, const RunOptions& opt,
                                   bool beside_input = true) {
  config.reject_unknown({"length_m", "thickness_m", "c_h", "rho", "period_s"});
  auto loaded = io::load_centerline(centerline_csv);
  TailPlanform planform = planform_from(config);
  if (!config.has("length_m")) planform.length = loaded.sequence.grid.length();
  std::optional<double> period;
  if (config.has("period_s")) period = config.get_double("period_s");

  EstimateOutput o;
  o.warnings = std::move(loaded.warnings);
  o.model = run_model(loaded.sequence, planform, period, std::nullopt);
  const fs::path dir = beside_input ? centerline_csv.parent_path() : opt.out_dir;
  if (!dir.empty()) detail::ensure_dir(dir);
  o.trace_path = dir / (centerline_csv.stem().string() + "_thrust.csv");
  io::write_force_trace(o.model.trace, o.trace_path);
  o.summary = thrust_summary(o.model, opt);
  return o;
}

// ---------------------------------------------------------------------------
// Measured traces

struct FilterSettings {
  sigproc::FirSpec drift = sigproc::drift_filter_spec();
  sigproc::FirSpec denoise = sigproc::denoise_filter_spec();
};

inline sigproc::Window parse_window(const std::string& s) {
  if (s == "hann") return sigproc::Window::hann;
  if (s == "rectangular") return sigproc::Window::rectangular;
  throw Error("unknown window '" + s + "' (hann | rectangular)");
}

inline FilterSettings filters_from(const io::KeyValueFile& kv) {
  kv.reject_unknown({"drift_order", "drift_cutoff_hz", "drift_window", "denoise_order",
                     "denoise_cutoff_hz", "denoise_window"});
  FilterSettings f;
  f.drift.order = static_cast<int>(kv.get_int("drift_order", f.drift.order));
  f.drift.cutoff = kv.get_double("drift_cutoff_hz", f.drift.cutoff);
  if (kv.has("drift_window")) f.drift.window = parse_window(kv.get_string("drift_window"));
  f.denoise.order = static_cast<int>(kv.get_int("denoise_order", f.denoise.order));
  f.denoise.cutoff = kv.get_double("denoise_cutoff_hz", f.denoise.cutoff);
  if (kv.has("denoise_window"))
    f.denoise.window = parse_window(kv.get_string("denoise_window"));
  return f;
}

struct AnalyzeOutput {
  io::ExperimentManifest manifest;
  TimeSeries force;  // filtered force [N]
  std::size_t cycles_available = 0;
  sigproc::CycleMetrics metrics;
  io::ResultsTable table;
  std::string summary;
};

/// Pure analysis of a voltage trace: calibration, drift removal, denoising,
/// segmentation and metrics.
inline AnalyzeOutput analyze_trace(const TimeSeries& volts, const io::ExperimentManifest& m,
                                   const FilterSettings& filters, std::size_t n_cycles) {
  AnalyzeOutput o;
  o.manifest = m;
  const sensor::CalibrationFit fit{m.cal_slope_v_per_n, 0.0, 1.0, {}};
  const TimeSeries force = sensor::voltage_to_force(fit, volts);
  o.force = sigproc::filter_chain(force, filters.drift, filters.denoise);
  const auto windows = sigproc::segment_cycles(o.force, m.f_hz, m.t0_s);
  o.cycles_available = windows.size();
  o.metrics = sigproc::cycle_metrics(windows, n_cycles);
  return o;
}

inline AnalyzeOutput cmd_analyze(const fs::path& manifest_path,
                                 const FilterSettings& filters, const RunOptions& opt) {
  const io::ExperimentManifest m = io::load_manifest(manifest_path);
  if (m.trace.empty()) throw Error(manifest_path.string() + ": manifest names no trace");
  const TimeSeries volts = io::load_trace(m.trace, m);
  AnalyzeOutput o = analyze_trace(volts, m, filters, opt.n_cycles);

  detail::ensure_dir(opt.out_dir);
  const fs::path results = opt.out_dir / "results.csv";
  if (fs::exists(results)) o.table = io::read_results(results);
  std::erase_if(o.table.tests, [&](const io::TestRow& r) {
    return r.device == m.device && r.f_hz == m.f_hz && r.dc_pct == m.dc_pct &&
           r.test_id == m.test_id;
  });
  o.table.tests.push_back({m.device, m.f_hz, m.dc_pct, m.test_id, o.metrics.mean_peak,
                           o.metrics.mean_average});
  io::aggregate(o.table);
  io::write_results(o.table, results);
  io::write_trace(o.force, opt.out_dir / (m.trace.stem().string() + "_force.csv"));

  std::ostringstream os;
  for (const auto& w : m.warnings) os << "warning: " << w << "\n";
  os << m.device << " f=" << io::format_number(m.f_hz) << " Hz, DC="
     << io::format_number(m.dc_pct) << " %, test " << m.test_id << ": "
     << o.cycles_available << " cycles available, " << opt.n_cycles << " analyzed\n";
  for (std::size_t c = 0; c < o.metrics.peaks.size(); ++c)
    os << "  cycle " << c << ": F_p = " << detail::in_mN(o.metrics.peaks[c])
       << ", F_a = " << detail::in_uN(o.metrics.averages[c]) << "\n";
  os << "F_p bar = " << detail::in_mN(o.metrics.mean_peak)
     << ", F_a bar = " << detail::in_uN(o.metrics.mean_average) << "\n";
  o.summary = os.str();
  return o;
}

/// Writes the results table plus the per-test and per-cell CSVs, one pair
/// per device present.
inline void write_sweep_outputs(const io::ResultsTable& table, const fs::path& dir) {
  detail::ensure_dir(dir);
  io::write_results(table, dir / "results.csv");
  for (const std::string device : {"single-tail", "dual-tail"}) {
    std::vector<io::TestRow> tests;
    std::vector<io::AggregateRow> aggs;
    for (const auto& r : table.tests)
      if (r.device == device) tests.push_back(r);
    for (const auto& r : table.aggregates)
      if (r.device == device) aggs.push_back(r);
    if (tests.empty()) continue;
    io::write_metrics_csv(tests, dir / ("metrics_" + device + ".csv"));
    io::write_aggregate_csv(aggs, dir / ("aggregate_" + device + ".csv"));
  }
}

struct SweepOutput {
  io::ResultsTable table;
  std::string summary;
};

/// Merges test rows from one or more results tables and re-aggregates them
/// over the f-DC grid.
inline SweepOutput cmd_sweep(const std::vector<fs::path>& inputs, const RunOptions& opt) {
  if (inputs.empty()) throw Error("sweep: no results tables given");
  SweepOutput o;
  for (const auto& p : inputs) {
    const auto t = io::read_results(p);
    o.table.tests.insert(o.table.tests.end(), t.tests.begin(), t.tests.end());
  }
  io::aggregate(o.table);
  write_sweep_outputs(o.table, opt.out_dir);

  std::ostringstream os;
  os << o.table.tests.size() << " test rows, " << o.table.aggregates.size()
     << " aggregate rows\n";
  os << "device        f_hz  dc_pct  n  mean F_p bar (ESD)        mean F_a bar (ESD)\n";
  for (const auto& a : o.table.aggregates)
    os << a.device << "  " << io::format_number(a.f_hz) << "  "
       << io::format_number(a.dc_pct) << "  " << a.n_tests << "  "
       << detail::in_mN(a.Fp.mean) << " (" << detail::in_mN(a.Fp.esd) << ")  "
       << detail::in_uN(a.Fa.mean) << " (" << detail::in_uN(a.Fa.esd) << ")\n";
  o.summary = os.str();
  return o;
}

// ---------------------------------------------------------------------------
// Sensor

inline sensor::DcsDesign design_from(const io::KeyValueFile& kv) {
  sensor::DcsDesign d;
  d.E = kv.get_double("E_pa", d.E);
  d.w = kv.get_double("w_m", d.w);
  d.d = kv.get_double("d_m", d.d);
  d.l_b = kv.get_double("l_b_m", d.l_b);
  d.eta = kv.get_double("eta", d.eta);
  if (kv.has("m_tot_kg") && kv.has("f_n_hz"))
    throw Error(kv.origin() + ": give either m_tot_kg or f_n_hz, not both");
  if (kv.has("m_tot_kg")) {
    d.m_tot = kv.get_double("m_tot_kg");
  } else {
    d = sensor::with_natural_frequency(
        d, kv.get_double("f_n_hz", sensor::kReferenceNaturalFrequency));
  }
  d.validate();
  return d;
}

inline constexpr double kBandwidthErrors[] = {0.001, 0.005, 0.01, 0.02, 0.05, 0.1};

struct SensorOutput {
  sensor::DcsDesign design;
  double k_tot = 0.0;
  double f_n = 0.0;
  std::vector<std::pair<double, double>> bandwidth;  // (error, Hz)
  std::vector<double> curve_hz;
  std::vector<double> curve_normalized;
  std::optional<TimeSeries> step;
  std::string report;
};

inline SensorOutput cmd_sensor(const io::KeyValueFile& config, const RunOptions& opt) {
  config.reject_unknown({"E_pa", "w_m", "d_m", "l_b_m", "eta", "m_tot_kg", "f_n_hz",
                         "curve_points", "step_force_n", "step_duration_s",
                         "step_rate_hz", "step_noise_v", "probe_gain_v_per_m"});
  SensorOutput o;
  o.design = design_from(config);
  o.k_tot = sensor::stiffness(o.design);
  o.f_n = sensor::natural_frequency_hz(o.design);
  for (double e : kBandwidthErrors)
    o.bandwidth.emplace_back(e, sensor::bandwidth_for_error(o.design, e));

  const auto points = config.get_int("curve_points", 1001);
  if (points < 2) throw Error(config.origin() + ": curve_points must be >= 2");
  for (long long i = 0; i < points; ++i) {
    const double f = std::pow(10.0, 3.0 * static_cast<double>(i) / static_cast<double>(points - 1));
    o.curve_hz.push_back(f);
    o.curve_normalized.push_back(
        sensor::normalized_response(o.design, 2.0 * std::numbers::pi * f));
  }

  detail::ensure_dir(opt.out_dir);
  {
    std::ostringstream c;
    c << "f_hz,normalized,normalized_db\n";
    for (std::size_t i = 0; i < o.curve_hz.size(); ++i)
      c << io::format_number(o.curve_hz[i]) << "," << io::format_number(o.curve_normalized[i])
        << "," << io::format_number(20.0 * std::log10(o.curve_normalized[i])) << "\n";
    detail::write_text(opt.out_dir / "response_curve.csv", c.str());
  }
  {
    std::ostringstream b;
    b << "max_rel_error,bandwidth_hz\n";
    for (auto [e, f] : o.bandwidth)
      b << io::format_number(e) << "," << io::format_number(f) << "\n";
    detail::write_text(opt.out_dir / "bandwidth.csv", b.str());
  }
  if (config.has("step_force_n")) {
    const double gain = config.get_double("probe_gain_v_per_m");
    o.step = sensor::simulate_step_response(
        o.design, config.get_double("step_force_n"),
        config.get_double("step_duration_s", 2.0),
        config.get_double("step_rate_hz", sigproc::kReferenceSampleRate),
        config.get_double("step_noise_v", 0.0), gain, opt.seed);
    io::write_trace(*o.step, opt.out_dir / "step_response.csv");
  }

  std::ostringstream r;
  r << "k_tot_N_per_m = " << io::format_number(o.k_tot) << "\n"
    << "I_m4 = " << io::format_number(sensor::second_moment(o.design)) << "\n"
    << "m_tot_kg = " << io::format_number(o.design.m_tot) << "\n"
    << "f_n_hz = " << io::format_number(o.f_n) << "\n"
    << "eta = " << io::format_number(o.design.eta) << "\n"
    << "peak_normalized = "
    << io::format_number(sensor::normalized_response_ratio(1.0, o.design.eta)) << "\n"
    << "resolution_N = " << io::format_number(sensor::kResolution) << "\n"
    << "range_N = " << io::format_number(sensor::kRange) << "\n";
  for (auto [e, f] : o.bandwidth)
    r << "bandwidth_hz_at_" << detail::fixed(e * 100.0, 1) << "pct = "
      << detail::fixed(f, 3) << "\n";
  o.report = r.str();
  detail::write_text(opt.out_dir / "sensor_report.txt", o.report);
  return o;
}

struct CalibrateOutput {
  sensor::CalibrationFit fit;
  std::string summary;
};

inline CalibrateOutput cmd_calibrate(const fs::path& calibration_csv, const RunOptions& opt) {
  CalibrateOutput o{sensor::fit_calibration(io::load_calibration(calibration_csv)), {}};
  detail::ensure_dir(opt.out_dir);
  std::ostringstream c;
  c << "force_N,n,mean_V,esd_V\n";
  for (const auto& lv : o.fit.levels)
    c << io::format_number(lv.force) << "," << lv.n << "," << io::format_number(lv.mean)
      << "," << io::format_number(lv.esd) << "\n";
  detail::write_text(opt.out_dir / "calibration_levels.csv", c.str());

  std::ostringstream s;
  s << "slope_V_per_N = " << io::format_number(o.fit.slope) << "\n"
    << "intercept_V = " << io::format_number(o.fit.intercept) << "\n"
    << "r_squared = " << io::format_number(o.fit.r_squared) << "\n";
  detail::write_text(opt.out_dir / "calibration_fit.txt", s.str());
  s << "(" << detail::fixed(o.fit.slope * 1e-3, 4) << " V/mN)\n";
  o.summary = s.str();
  return o;
}

}  // namespace tailforce::cli
