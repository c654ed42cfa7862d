#pragma once

// Persistence for the experiment workflow: key=value manifests, trace and
// centerline CSV ingestion with located diagnostics, results tables.
// Files are always SI. Numbers are written in shortest round-trip form, so
// write -> read is bit-exact.

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include "tailforce/error.hpp"
#include "tailforce/field.hpp"
#include "tailforce/kinematics.hpp"
#include "tailforce/reactive_model.hpp"
#include "tailforce/sensor.hpp"
#include "tailforce/sigproc.hpp"
#include "tailforce/time_series.hpp"

namespace tailforce::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Text primitives

inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("format_number: conversion failed");
  return {buf, end};
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

/// Lines of a text file, with 1-based numbering preserved by index + 1.
inline std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open for reading");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

inline std::string located(const fs::path& path, std::size_t line, const std::string& msg) {
  return path.string() + ":" + std::to_string(line) + ": " + msg;
}

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string_view> fields;
};

/// Reads a CSV with an exact expected header; blank lines are rejected.
/// Returned views point into `storage`.
inline std::vector<CsvRow> read_csv(const fs::path& path, std::string_view header,
                                    std::vector<std::string>& storage,
                                    std::size_t first_line = 0) {
  storage = read_lines(path);
  if (storage.size() <= first_line)
    throw Error(path.string() + ": missing header '" + std::string(header) + "'");
  if (trim(storage[first_line]) != header)
    throw Error(located(path, first_line + 1,
                        "expected header '" + std::string(header) + "', got '" +
                            storage[first_line] + "'"));
  const std::size_t ncol = split_csv(header).size();
  std::vector<CsvRow> rows;
  for (std::size_t i = first_line + 1; i < storage.size(); ++i) {
    if (trim(storage[i]).empty()) {
      if (i + 1 == storage.size()) break;
      throw Error(located(path, i + 1, "blank line"));
    }
    CsvRow r{i + 1, split_csv(storage[i])};
    if (r.fields.size() != ncol)
      throw Error(located(path, i + 1,
                          "expected " + std::to_string(ncol) + " fields, got " +
                              std::to_string(r.fields.size())));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline double field_double(const fs::path& path, const CsvRow& row, std::size_t col,
                           std::string_view name) {
  auto v = parse_double(row.fields[col]);
  if (!v || !std::isfinite(*v))
    throw Error(located(path, row.line,
                        "malformed " + std::string(name) + " '" +
                            std::string(row.fields[col]) + "'"));
  return *v;
}

inline long long field_int(const fs::path& path, const CsvRow& row, std::size_t col,
                           std::string_view name) {
  auto v = parse_int(row.fields[col]);
  if (!v)
    throw Error(located(path, row.line,
                        "malformed " + std::string(name) + " '" +
                            std::string(row.fields[col]) + "'"));
  return *v;
}

// ---------------------------------------------------------------------------
// key = value files (manifests and run configs)

class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text, std::string origin) {
    KeyValueFile kv;
    kv.origin_ = std::move(origin);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
      ++line_no;
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      if (const auto hash = line.find('#'); hash != std::string_view::npos)
        line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw Error(kv.origin_ + ":" + std::to_string(line_no) + ": expected key = value");
      std::string key(trim(line.substr(0, eq)));
      std::string value(trim(line.substr(eq + 1)));
      if (key.empty())
        throw Error(kv.origin_ + ":" + std::to_string(line_no) + ": empty key");
      if (kv.entries_.count(key))
        throw Error(kv.origin_ + ":" + std::to_string(line_no) + ": duplicate key '" +
                    key + "'");
      kv.entries_[key] = {value, line_no};
    }
    return kv;
  }

  static KeyValueFile load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(path.string() + ": cannot open for reading");
    std::stringstream ss;
    ss << in.rdbuf();
    KeyValueFile kv = parse(ss.str(), path.string());
    kv.base_dir_ = path.parent_path();
    return kv;
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string get_string(const std::string& key) const { return entry(key).value; }
  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? entry(key).value : fallback;
  }

  double get_double(const std::string& key) const {
    const auto& e = entry(key);
    auto v = parse_double(e.value);
    if (!v || !std::isfinite(*v))
      throw Error(where(e) + "'" + key + "' is not a number: '" + e.value + "'");
    return *v;
  }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  long long get_int(const std::string& key) const {
    const auto& e = entry(key);
    auto v = parse_int(e.value);
    if (!v) throw Error(where(e) + "'" + key + "' is not an integer: '" + e.value + "'");
    return *v;
  }
  long long get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  /// Path value resolved against the file's directory.
  fs::path get_path(const std::string& key) const {
    fs::path p(get_string(key));
    return p.is_relative() ? base_dir_ / p : p;
  }

  void reject_unknown(const std::set<std::string>& known) const {
    for (const auto& [k, e] : entries_)
      if (!known.count(k)) throw Error(where(e) + "unknown key '" + k + "'");
  }

  const std::string& origin() const { return origin_; }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  const Entry& entry(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(origin_ + ": missing required key '" + key + "'");
    return it->second;
  }
  std::string where(const Entry& e) const {
    return origin_ + ":" + std::to_string(e.line) + ": ";
  }

  std::string origin_;
  fs::path base_dir_;
  std::map<std::string, Entry> entries_;
};

// ---------------------------------------------------------------------------
// Experiment manifest

inline constexpr int kSchemaVersion = 1;

struct ExperimentManifest {
  std::string device = "single-tail";  // single-tail | dual-tail
  double f_hz = 1.0;
  double dc_pct = 5.0;
  double rate_hz = sigproc::kReferenceSampleRate;
  double t0_s = 0.0;
  double current_ma = 250.0;
  double cal_slope_v_per_n = 1460.0;
  int test_id = 0;
  fs::path trace;
  std::vector<std::string> warnings;
};

inline void validate_manifest(ExperimentManifest& m, const std::string& origin) {
  if (m.device != "single-tail" && m.device != "dual-tail")
    throw Error(origin + ": device must be 'single-tail' or 'dual-tail', got '" +
                m.device + "'");
  if (!(m.rate_hz > 0.0)) throw Error(origin + ": rate_hz must be positive");
  if (!(m.f_hz > 0.0)) throw Error(origin + ": f_hz must be positive");
  if (!(m.dc_pct > 0.0 && m.dc_pct < 100.0))
    throw Error(origin + ": dc_pct must lie in (0, 100)");
  if (m.cal_slope_v_per_n == 0.0) throw Error(origin + ": cal_slope_v_per_n is zero");
  if (m.t0_s < 0.0) throw Error(origin + ": t0_s must be >= 0");
  m.warnings.clear();
  if (m.f_hz != std::round(m.f_hz) || m.f_hz < 1.0 || m.f_hz > 4.0)
    m.warnings.push_back("f_hz = " + format_number(m.f_hz) +
                         " is outside the characterized set {1, 2, 3, 4} Hz");
  if (m.dc_pct < 1.0 || m.dc_pct > 10.0)
    m.warnings.push_back("dc_pct = " + format_number(m.dc_pct) +
                         " is outside the characterized range [1, 10] %");
}

inline ExperimentManifest manifest_from(const KeyValueFile& kv) {
  kv.reject_unknown({"schema", "device", "f_hz", "dc_pct", "rate_hz", "t0_s",
                     "current_ma", "cal_slope_v_per_n", "test_id", "trace"});
  if (kv.get_int("schema") != kSchemaVersion)
    throw Error(kv.origin() + ": schema version mismatch (expected " +
                std::to_string(kSchemaVersion) + ")");
  ExperimentManifest m;
  m.device = kv.get_string("device");
  m.f_hz = kv.get_double("f_hz");
  m.dc_pct = kv.get_double("dc_pct");
  m.rate_hz = kv.get_double("rate_hz");
  m.t0_s = kv.get_double("t0_s", 0.0);
  m.current_ma = kv.get_double("current_ma", 250.0);
  m.cal_slope_v_per_n = kv.get_double("cal_slope_v_per_n");
  m.test_id = static_cast<int>(kv.get_int("test_id", 0));
  if (kv.has("trace")) m.trace = kv.get_path("trace");
  validate_manifest(m, kv.origin());
  return m;
}

inline ExperimentManifest load_manifest(const fs::path& path) {
  return manifest_from(KeyValueFile::load(path));
}

inline void write_manifest(const ExperimentManifest& m, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << "schema = " << kSchemaVersion << "\n"
      << "device = " << m.device << "\n"
      << "f_hz = " << format_number(m.f_hz) << "\n"
      << "dc_pct = " << format_number(m.dc_pct) << "\n"
      << "rate_hz = " << format_number(m.rate_hz) << "\n"
      << "t0_s = " << format_number(m.t0_s) << "\n"
      << "current_ma = " << format_number(m.current_ma) << "\n"
      << "cal_slope_v_per_n = " << format_number(m.cal_slope_v_per_n) << "\n"
      << "test_id = " << m.test_id << "\n";
  if (!m.trace.empty()) out << "trace = " << m.trace.string() << "\n";
  if (!out) throw Error(path.string() + ": write failed");
}

// ---------------------------------------------------------------------------
// Traces

inline constexpr std::string_view kTraceHeader = "time_s,value";

inline TimeSeries load_trace(const fs::path& path, const ExperimentManifest& manifest) {
  std::vector<std::string> storage;
  const auto rows = read_csv(path, kTraceHeader, storage);
  if (rows.empty()) throw Error(path.string() + ": no samples");
  TimeSeries ts{manifest.rate_hz, 0.0, {}};
  ts.samples.reserve(rows.size());
  double prev_t = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double t = field_double(path, rows[i], 0, "time_s");
    const double v = field_double(path, rows[i], 1, "value");
    if (i == 0) ts.start = t;
    else if (!(t > prev_t))
      throw Error(located(path, rows[i].line, "time does not increase (non-monotonic)"));
    prev_t = t;
    ts.samples.push_back(v);
  }
  if (rows.size() >= 2) {
    const double est = static_cast<double>(rows.size() - 1) / (prev_t - ts.start);
    if (std::abs(est / manifest.rate_hz - 1.0) > 1e-3)
      throw Error(path.string() + ": sample rate " + format_number(est) +
                  " Hz differs from manifest rate " + format_number(manifest.rate_hz) +
                  " Hz by more than 0.1%");
  }
  return ts;
}

inline void write_trace(const TimeSeries& ts, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << kTraceHeader << "\n";
  for (std::size_t i = 0; i < ts.size(); ++i)
    out << format_number(ts.time(i)) << "," << format_number(ts.samples[i]) << "\n";
  if (!out) throw Error(path.string() + ": write failed");
}

inline constexpr std::string_view kForceTraceHeader = "time_s,F_th_N,F_lat_N";

inline void write_force_trace(const ForceTrace& tr, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << kForceTraceHeader << "\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    out << format_number(tr.times[i]) << "," << format_number(tr.F_th[i]) << ","
        << format_number(tr.F_lat[i]) << "\n";
  if (!out) throw Error(path.string() + ": write failed");
}

inline ForceTrace read_force_trace(const fs::path& path) {
  std::vector<std::string> storage;
  const auto rows = read_csv(path, kForceTraceHeader, storage);
  ForceTrace tr;
  for (const auto& r : rows) {
    tr.times.push_back(field_double(path, r, 0, "time_s"));
    tr.F_th.push_back(field_double(path, r, 1, "F_th_N"));
    tr.F_lat.push_back(field_double(path, r, 2, "F_lat_N"));
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Centerlines

inline constexpr std::string_view kCenterlineHeader = "frame,time_s,s_m,x_m,y_m";

struct CenterlineLoad {
  CenterlineSequence sequence;
  std::vector<std::string> warnings;
};

inline CenterlineLoad load_centerline(const fs::path& path,
                                      double arc_tolerance = kArcTolerance) {
  std::vector<std::string> storage;
  const auto rows = read_csv(path, kCenterlineHeader, storage);
  if (rows.empty()) throw Error(path.string() + ": no centerline rows");

  struct Frame {
    long long id;
    double time;
    std::size_t first_line;
    std::vector<double> s, x, y;
  };
  std::vector<Frame> frames;
  for (const auto& r : rows) {
    const long long id = field_int(path, r, 0, "frame");
    const double t = field_double(path, r, 1, "time_s");
    const double s = field_double(path, r, 2, "s_m");
    const double x = field_double(path, r, 3, "x_m");
    const double y = field_double(path, r, 4, "y_m");
    if (frames.empty() || frames.back().id != id) {
      if (!frames.empty() && id < frames.back().id)
        throw Error(located(path, r.line, "rows not sorted by frame"));
      if (!frames.empty() && id != frames.back().id + 1)
        throw Error(located(path, r.line,
                            "missing frame " + std::to_string(frames.back().id + 1)));
      frames.push_back({id, t, r.line, {}, {}, {}});
    }
    Frame& f = frames.back();
    if (t != f.time)
      throw Error(located(path, r.line,
                          "time_s differs within frame " + std::to_string(id)));
    if (!f.s.empty() && !(s > f.s.back()))
      throw Error(located(path, r.line,
                          "s_m not increasing within frame " + std::to_string(id)));
    f.s.push_back(s);
    f.x.push_back(x);
    f.y.push_back(y);
  }

  const auto& ref = frames.front();
  const std::size_t n_s = ref.s.size();
  if (n_s < 3) throw Error(path.string() + ": frame " + std::to_string(ref.id) +
                           " has fewer than 3 arc samples");
  const double l = ref.s.back();
  if (!(l > 0.0) || std::abs(ref.s.front()) > 1e-12 * l)
    throw Error(path.string() + ": arc grid must start at s = 0 with positive length");
  const ArcGrid grid(n_s, l);
  for (std::size_t j = 0; j < n_s; ++j)
    if (std::abs(ref.s[j] - grid.s(j)) > 1e-6 * grid.spacing())
      throw Error(path.string() + ": arc grid is not uniform at sample " +
                  std::to_string(j) + " of frame " + std::to_string(ref.id));
  for (const auto& f : frames) {
    if (f.s.size() != n_s)
      throw Error(located(path, f.first_line,
                          "frame " + std::to_string(f.id) + " has " +
                              std::to_string(f.s.size()) + " arc samples, expected " +
                              std::to_string(n_s)));
    for (std::size_t j = 0; j < n_s; ++j)
      if (std::abs(f.s[j] - ref.s[j]) > 1e-9 * l)
        throw Error(located(path, f.first_line,
                            "frame " + std::to_string(f.id) +
                                " arc grid differs from frame " + std::to_string(ref.id)));
  }

  CenterlineLoad out{CenterlineSequence{grid, {}, ScalarField(frames.size(), n_s),
                                        ScalarField(frames.size(), n_s)},
                     {}};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    out.sequence.times.push_back(frames[i].time);
    for (std::size_t j = 0; j < n_s; ++j) {
      out.sequence.x(i, j) = frames[i].x[j];
      out.sequence.y(i, j) = frames[i].y[j];
    }
  }
  out.sequence.validate();
  const double dev = arc_length_deviation(out.sequence);
  if (dev > arc_tolerance)
    out.warnings.push_back(path.string() + ": arc-length deviation " + format_number(dev) +
                           " exceeds tolerance " + format_number(arc_tolerance));
  return out;
}

inline void write_centerline(const CenterlineSequence& cl, const fs::path& path) {
  cl.validate();
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << kCenterlineHeader << "\n";
  for (std::size_t i = 0; i < cl.n_t(); ++i)
    for (std::size_t j = 0; j < cl.grid.size(); ++j)
      out << i << "," << format_number(cl.times[i]) << "," << format_number(cl.grid.s(j))
          << "," << format_number(cl.x(i, j)) << "," << format_number(cl.y(i, j)) << "\n";
  if (!out) throw Error(path.string() + ": write failed");
}

// ---------------------------------------------------------------------------
// Calibration records

inline constexpr std::string_view kCalibrationHeader = "force_N,rep,voltage_V";

inline sensor::CalibrationRecord load_calibration(const fs::path& path) {
  std::vector<std::string> storage;
  const auto rows = read_csv(path, kCalibrationHeader, storage);
  if (rows.empty()) throw Error(path.string() + ": no calibration rows");
  sensor::CalibrationRecord rec;
  std::map<double, std::size_t> index;
  std::set<std::pair<double, long long>> seen;
  for (const auto& r : rows) {
    const double f = field_double(path, r, 0, "force_N");
    const long long rep = field_int(path, r, 1, "rep");
    const double v = field_double(path, r, 2, "voltage_V");
    if (!seen.insert({f, rep}).second)
      throw Error(located(path, r.line, "duplicate repetition " + std::to_string(rep)));
    auto [it, fresh] = index.try_emplace(f, rec.levels.size());
    if (fresh) rec.levels.push_back({f, {}});
    rec.levels[it->second].voltages.push_back(v);
  }
  return rec;
}

inline void write_calibration(const sensor::CalibrationRecord& rec, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << kCalibrationHeader << "\n";
  for (const auto& lv : rec.levels)
    for (std::size_t r = 0; r < lv.voltages.size(); ++r)
      out << format_number(lv.force) << "," << r << "," << format_number(lv.voltages[r])
          << "\n";
  if (!out) throw Error(path.string() + ": write failed");
}

// ---------------------------------------------------------------------------
// Results tables

struct TestRow {
  std::string device;
  double f_hz = 0.0;
  double dc_pct = 0.0;
  int test_id = 0;
  double Fp_bar = 0.0;  // [N]
  double Fa_bar = 0.0;  // [N]

  auto key() const { return std::tie(device, f_hz, dc_pct, test_id); }
};

struct AggregateRow {
  std::string device;
  double f_hz = 0.0;
  double dc_pct = 0.0;
  std::size_t n_tests = 0;
  sigproc::MeanEsd Fp;
  sigproc::MeanEsd Fa;

  auto key() const { return std::tie(device, f_hz, dc_pct); }
};

struct ResultsTable {
  std::vector<TestRow> tests;
  std::vector<AggregateRow> aggregates;
};

/// Sorts test rows by (device, f, DC, test) and rebuilds one aggregate row
/// per (device, f, DC) cell from them.
inline void aggregate(ResultsTable& table) {
  std::sort(table.tests.begin(), table.tests.end(),
            [](const TestRow& a, const TestRow& b) { return a.key() < b.key(); });
  for (std::size_t i = 1; i < table.tests.size(); ++i)
    if (table.tests[i].key() == table.tests[i - 1].key())
      throw Error("results: duplicate test " + std::to_string(table.tests[i].test_id) +
                  " for " + table.tests[i].device + " f=" +
                  format_number(table.tests[i].f_hz) +
                  " dc=" + format_number(table.tests[i].dc_pct));
  table.aggregates.clear();
  for (std::size_t i = 0; i < table.tests.size();) {
    std::size_t j = i;
    std::vector<double> p, a;
    while (j < table.tests.size() && table.tests[j].device == table.tests[i].device &&
           table.tests[j].f_hz == table.tests[i].f_hz &&
           table.tests[j].dc_pct == table.tests[i].dc_pct) {
      p.push_back(table.tests[j].Fp_bar);
      a.push_back(table.tests[j].Fa_bar);
      ++j;
    }
    table.aggregates.push_back({table.tests[i].device, table.tests[i].f_hz,
                                table.tests[i].dc_pct, p.size(), sigproc::mean_and_esd(p),
                                sigproc::mean_and_esd(a)});
    i = j;
  }
}

inline constexpr std::string_view kResultsSchemaLine = "# tailforce-results schema=1";
inline constexpr std::string_view kResultsHeader =
    "kind,device,f_hz,dc_pct,test_id,n_tests,Fp_N,Fa_N,esd_Fp_N,esd_Fa_N";

namespace detail {

// Exclusive lock on `path` for the lifetime of the object; a second writer
// fails instead of silently overwriting.
class WriteLock {
 public:
  explicit WriteLock(fs::path target) : lock_(target.string() + ".lock") {
    fd_ = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw Error(target.string() + ": another writer holds " + lock_.string());
  }
  ~WriteLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(lock_, ec);
  }
  WriteLock(const WriteLock&) = delete;
  WriteLock& operator=(const WriteLock&) = delete;

 private:
  fs::path lock_;
  int fd_ = -1;
};

}  // namespace detail

inline void write_results(const ResultsTable& table, const fs::path& path) {
  detail::WriteLock lock(path);
  std::vector<TestRow> tests = table.tests;
  std::vector<AggregateRow> aggs = table.aggregates;
  std::sort(tests.begin(), tests.end(),
            [](const TestRow& a, const TestRow& b) { return a.key() < b.key(); });
  std::sort(aggs.begin(), aggs.end(),
            [](const AggregateRow& a, const AggregateRow& b) { return a.key() < b.key(); });

  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(tmp.string() + ": cannot open for writing");
    out << kResultsSchemaLine << "\n" << kResultsHeader << "\n";
    for (const auto& r : tests)
      out << "test," << r.device << "," << format_number(r.f_hz) << ","
          << format_number(r.dc_pct) << "," << r.test_id << ",,"
          << format_number(r.Fp_bar) << "," << format_number(r.Fa_bar) << ",,\n";
    for (const auto& r : aggs)
      out << "aggregate," << r.device << "," << format_number(r.f_hz) << ","
          << format_number(r.dc_pct) << ",," << r.n_tests << ","
          << format_number(r.Fp.mean) << "," << format_number(r.Fa.mean) << ","
          << format_number(r.Fp.esd) << "," << format_number(r.Fa.esd) << "\n";
    if (!out) throw Error(tmp.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

inline ResultsTable read_results(const fs::path& path) {
  std::vector<std::string> storage = read_lines(path);
  if (storage.empty() || trim(storage[0]) != kResultsSchemaLine)
    throw Error(path.string() + ":1: schema version mismatch (expected '" +
                std::string(kResultsSchemaLine) + "')");
  const auto rows = read_csv(path, kResultsHeader, storage, 1);
  ResultsTable t;
  for (const auto& r : rows) {
    const auto kind = r.fields[0];
    const std::string device(r.fields[1]);
    if (device != "single-tail" && device != "dual-tail")
      throw Error(located(path, r.line, "unknown device '" + device + "'"));
    const double f = field_double(path, r, 2, "f_hz");
    const double dc = field_double(path, r, 3, "dc_pct");
    if (kind == "test") {
      t.tests.push_back({device, f, dc, static_cast<int>(field_int(path, r, 4, "test_id")),
                         field_double(path, r, 6, "Fp_N"), field_double(path, r, 7, "Fa_N")});
    } else if (kind == "aggregate") {
      const long long n = field_int(path, r, 5, "n_tests");
      if (n < 1) throw Error(located(path, r.line, "aggregate row with no tests"));
      t.aggregates.push_back({device, f, dc, static_cast<std::size_t>(n),
                              {field_double(path, r, 6, "Fp_N"),
                               field_double(path, r, 8, "esd_Fp_N")},
                              {field_double(path, r, 7, "Fa_N"),
                               field_double(path, r, 9, "esd_Fa_N")}});
    } else {
      throw Error(located(path, r.line, "unknown row kind '" + std::string(kind) + "'"));
    }
  }
  for (const auto& a : t.aggregates) {
    std::size_t n = 0;
    for (const auto& tr : t.tests)
      if (tr.device == a.device && tr.f_hz == a.f_hz && tr.dc_pct == a.dc_pct) ++n;
    if (n == 0)
      throw Error(path.string() + ": aggregate row " + a.device + " f=" +
                  format_number(a.f_hz) + " dc=" + format_number(a.dc_pct) +
                  " references no test rows");
  }
  return t;
}

/// Per-test metrics, `test_id,f_hz,dc_pct,Fp_bar_N,Fa_bar_N`.
inline void write_metrics_csv(std::span<const TestRow> rows, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << "test_id,f_hz,dc_pct,Fp_bar_N,Fa_bar_N\n";
  for (const auto& r : rows)
    out << r.test_id << "," << format_number(r.f_hz) << "," << format_number(r.dc_pct)
        << "," << format_number(r.Fp_bar) << "," << format_number(r.Fa_bar) << "\n";
  if (!out) throw Error(path.string() + ": write failed");
}

/// Per-cell aggregates, `f_hz,dc_pct,mean_Fp_N,esd_Fp_N,mean_Fa_N,esd_Fa_N`.
inline void write_aggregate_csv(std::span<const AggregateRow> rows, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << "f_hz,dc_pct,mean_Fp_N,esd_Fp_N,mean_Fa_N,esd_Fa_N\n";
  for (const auto& r : rows)
    out << format_number(r.f_hz) << "," << format_number(r.dc_pct) << ","
        << format_number(r.Fp.mean) << "," << format_number(r.Fp.esd) << ","
        << format_number(r.Fa.mean) << "," << format_number(r.Fa.esd) << "\n";
  if (!out) throw Error(path.string() + ": write failed");
}

}  // namespace tailforce::io
