#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tailforce/error.hpp"

namespace tailforce {

/// Uniformly sampled scalar signal.
struct TimeSeries {
  double rate = 0.0;   // [Hz]
  double start = 0.0;  // [s]
  std::vector<double> samples;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t i) const { return start + static_cast<double>(i) / rate; }
  double duration() const { return static_cast<double>(samples.size()) / rate; }

  void validate() const {
    if (!(rate > 0.0) || !std::isfinite(rate))
      throw Error("TimeSeries: rate must be positive");
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (!std::isfinite(samples[i]))
        throw Error("TimeSeries: non-finite sample at index " + std::to_string(i));
  }
};

}  // namespace tailforce
