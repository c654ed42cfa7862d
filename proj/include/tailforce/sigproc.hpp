#pragma once

// Measured-force signal chain: windowed-sinc FIR design, forward-backward
// (zero-phase) filtering, drift removal, cycle segmentation and per-cycle
// peak/average metrics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tailforce/error.hpp"
#include "tailforce/time_series.hpp"

namespace tailforce::sigproc {

inline constexpr double kReferenceSampleRate = 5000.0;  // [Hz]

enum class Window { hann, rectangular };

struct FirSpec {
  int order = 2;  // number of taps - 1, even
  double cutoff = 0.0;  // [Hz]
  Window window = Window::hann;

  void validate(double rate) const {
    if (order < 2 || order % 2 != 0)
      throw Error("FirSpec: order must be even and >= 2, got " + std::to_string(order));
    if (!(cutoff > 0.0) || !(cutoff < 0.5 * rate))
      throw Error("FirSpec: cutoff " + std::to_string(cutoff) +
                  " Hz must lie in (0, Nyquist = " + std::to_string(0.5 * rate) + " Hz)");
  }
};

/// Drift extractor: order 5000, 0.01 Hz. At 5 kHz the filter spans 1 s, far
/// short of the cutoff's time scale, so the truncated sinc is used unwindowed:
/// it behaves as a 1-s moving average with nulls at every integer Hz.
inline FirSpec drift_filter_spec() { return {5000, 0.01, Window::rectangular}; }

/// Denoiser: order 2000, 50 Hz, Hann.
inline FirSpec denoise_filter_spec() { return {2000, 50.0, Window::hann}; }

/// Linear-phase lowpass taps, DC gain normalized to 1.
inline std::vector<double> design_lowpass(const FirSpec& spec, double rate) {
  if (!(rate > 0.0)) throw Error("design_lowpass: rate must be positive");
  spec.validate(rate);
  const int N = spec.order;
  const double fc = spec.cutoff / rate;  // cycles per sample
  std::vector<double> h(static_cast<std::size_t>(N) + 1);
  for (int i = 0; i <= N / 2; ++i) {
    const double m = static_cast<double>(i - N / 2);
    const double arg = 2.0 * std::numbers::pi * fc * m;
    double v = m == 0.0 ? 2.0 * fc : std::sin(arg) / (std::numbers::pi * m);
    if (spec.window == Window::hann)
      v *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / N));
    h[static_cast<std::size_t>(i)] = v;
    h[static_cast<std::size_t>(N - i)] = v;
  }
  double sum = 0.0;
  for (double v : h) sum += v;
  for (double& v : h) v /= sum;
  return h;
}

/// |H(f)| of an FIR filter.
inline double frequency_response(std::span<const double> taps, double f, double rate) {
  std::complex<double> acc{0.0, 0.0};
  const double w = 2.0 * std::numbers::pi * f / rate;
  for (std::size_t n = 0; n < taps.size(); ++n)
    acc += taps[n] * std::polar(1.0, -w * static_cast<double>(n));
  return std::abs(acc);
}

namespace detail {

// Causal FIR pass with zero initial state. Taps are symmetric, so the
// convolution can run over x in forward order.
inline std::vector<double> causal_pass(std::span<const double> x,
                                       std::span<const double> h) {
  const std::size_t M = h.size(), L = x.size();
  std::vector<double> y(L, 0.0);
  for (std::size_t n = 0; n < L; ++n) {
    const std::size_t first = n + 1 >= M ? n + 1 - M : 0;
    const std::size_t j0 = first + M - 1 - n;  // tap index paired with x[first]
    double acc = 0.0;
    const double* xp = x.data() + first;
    const double* hp = h.data() + j0;
    const std::size_t count = n + 1 - first;
    for (std::size_t k = 0; k < count; ++k) acc += hp[k] * xp[k];
    y[n] = acc;
  }
  return y;
}

}  // namespace detail

/// Forward-backward filtering with one filter length of odd-reflection
/// padding per side. Net response |H|^2 with zero phase.
inline TimeSeries zero_phase_filter(const TimeSeries& series, std::span<const double> taps) {
  series.validate();
  if (taps.empty()) throw Error("zero_phase_filter: no taps");
  for (std::size_t i = 0; i < taps.size(); ++i)
    if (taps[i] != taps[taps.size() - 1 - i])
      throw Error("zero_phase_filter: taps must be symmetric");
  const std::size_t N = series.size(), pad = taps.size();
  if (N <= 3 * taps.size())
    throw Error("zero_phase_filter: series of " + std::to_string(N) +
                " samples is too short for a " + std::to_string(taps.size()) +
                "-tap filter (need > " + std::to_string(3 * taps.size()) + ")");

  const auto& x = series.samples;
  std::vector<double> xp(N + 2 * pad);
  for (std::size_t k = 0; k < pad; ++k) {
    xp[pad - 1 - k] = 2.0 * x.front() - x[k + 1];
    xp[pad + N + k] = 2.0 * x.back() - x[N - 2 - k];
  }
  std::copy(x.begin(), x.end(), xp.begin() + static_cast<std::ptrdiff_t>(pad));

  std::vector<double> y = detail::causal_pass(xp, taps);
  std::reverse(y.begin(), y.end());
  y = detail::causal_pass(y, taps);
  std::reverse(y.begin(), y.end());

  TimeSeries out{series.rate, series.start, {}};
  out.samples.assign(y.begin() + static_cast<std::ptrdiff_t>(pad),
                     y.begin() + static_cast<std::ptrdiff_t>(pad + N));
  return out;
}

inline TimeSeries lowpass(const TimeSeries& series, const FirSpec& spec) {
  return zero_phase_filter(series, design_lowpass(spec, series.rate));
}

/// series - lowpass(series): removes offsets and slow drift.
inline TimeSeries remove_drift(const TimeSeries& series,
                               const FirSpec& drift = drift_filter_spec()) {
  TimeSeries out = lowpass(series, drift);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.samples[i] = series.samples[i] - out.samples[i];
  return out;
}

/// Drift removal followed by denoising.
inline TimeSeries filter_chain(const TimeSeries& series,
                               const FirSpec& drift = drift_filter_spec(),
                               const FirSpec& denoise = denoise_filter_spec()) {
  return lowpass(remove_drift(series, drift), denoise);
}

struct CycleWindow {
  double start_time = 0.0;  // [s]
  std::vector<double> samples;
};

/// Consecutive windows of round(rate / f) samples from t0; the trailing
/// partial window is dropped.
inline std::vector<CycleWindow> segment_cycles(const TimeSeries& series,
                                               double actuation_freq, double t0) {
  series.validate();
  if (!(actuation_freq > 0.0))
    throw Error("segment_cycles: actuation frequency must be positive");
  const double offset = (t0 - series.start) * series.rate;
  if (offset < -1e-6 || !std::isfinite(offset))
    throw Error("segment_cycles: t0 precedes the series start");
  const auto first = static_cast<std::size_t>(std::llround(std::max(0.0, offset)));
  if (first >= series.size())
    throw Error("segment_cycles: t0 = " + std::to_string(t0) + " s is beyond the series end");
  const auto len = static_cast<std::size_t>(std::llround(series.rate / actuation_freq));
  if (len < 2) throw Error("segment_cycles: cycle shorter than 2 samples");

  std::vector<CycleWindow> out;
  for (std::size_t b = first; b + len <= series.size(); b += len) {
    CycleWindow w{series.time(b), {}};
    w.samples.assign(series.samples.begin() + static_cast<std::ptrdiff_t>(b),
                     series.samples.begin() + static_cast<std::ptrdiff_t>(b + len));
    out.push_back(std::move(w));
  }
  if (out.empty())
    throw Error("segment_cycles: series does not span one full period after t0");
  return out;
}

struct CycleMetrics {
  std::vector<double> peaks;     // F_p per cycle [N]
  std::vector<double> averages;  // F_a per cycle [N]
  double mean_peak = 0.0;        // F_p bar
  double mean_average = 0.0;     // F_a bar
};

/// Uses the first n_cycles windows. F_p is the window maximum; F_a the
/// period average (trapezoid over one closed period of a periodic window,
/// which reduces to the sample mean).
inline CycleMetrics cycle_metrics(std::span<const CycleWindow> windows,
                                  std::size_t n_cycles = 5) {
  if (n_cycles == 0) throw Error("cycle_metrics: n_cycles must be >= 1");
  if (windows.size() < n_cycles)
    throw Error("cycle_metrics: " + std::to_string(windows.size()) +
                " cycles available, " + std::to_string(n_cycles) + " required");
  CycleMetrics m;
  for (std::size_t c = 0; c < n_cycles; ++c) {
    const auto& s = windows[c].samples;
    if (s.empty()) throw Error("cycle_metrics: empty window");
    double sum = 0.0;
    for (double v : s) sum += v;
    m.peaks.push_back(*std::max_element(s.begin(), s.end()));
    m.averages.push_back(sum / static_cast<double>(s.size()));
  }
  for (std::size_t c = 0; c < n_cycles; ++c) {
    m.mean_peak += m.peaks[c];
    m.mean_average += m.averages[c];
  }
  m.mean_peak /= static_cast<double>(n_cycles);
  m.mean_average /= static_cast<double>(n_cycles);
  return m;
}

struct MeanEsd {
  double mean = 0.0;
  double esd = 0.0;  // sample standard deviation, n - 1 divisor; 0 for n = 1
};

inline MeanEsd mean_and_esd(std::span<const double> v) {
  if (v.empty()) throw Error("mean_and_esd: no values");
  MeanEsd r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.esd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

struct TestAggregate {
  std::size_t n_tests = 0;
  MeanEsd peak;     // over F_p bar of each test
  MeanEsd average;  // over F_a bar of each test
};

inline TestAggregate aggregate_tests(std::span<const CycleMetrics> tests) {
  std::vector<double> p, a;
  for (const auto& t : tests) {
    p.push_back(t.mean_peak);
    a.push_back(t.mean_average);
  }
  return {tests.size(), mean_and_esd(p), mean_and_esd(a)};
}

}  // namespace tailforce::sigproc
