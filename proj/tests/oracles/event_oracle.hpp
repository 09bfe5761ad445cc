#pragma once

// Per-pixel threshold-crossing reference. Levels are found by floor/ceil
// division of the log change instead of stepping a reference value.

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

struct PixelEvent {
  double t_us = 0.0;  // unrounded
  int polarity = 0;
};

/// log_trace[k] and times_s[k] for one pixel; returns its events in order.
inline std::vector<PixelEvent> pixel_events(const std::vector<double>& log_trace, const std::vector<double>& times_s,
                                            double c) {
  std::vector<PixelEvent> out;
  const double l0 = log_trace[0];
  long long level = 0;
  for (std::size_t k = 0; k + 1 < log_trace.size(); ++k) {
    const double a = log_trace[k];
    const double b = log_trace[k + 1];
    const auto time_at = [&](double crossing) {
      const double s = (crossing - a) / (b - a);
      return (times_s[k] + s * (times_s[k + 1] - times_s[k])) * 1e6;
    };
    if (b > a) {
      const auto target = static_cast<long long>(std::floor((b - l0) / c));
      for (long long n = level + 1; n <= target; ++n) out.push_back({time_at(l0 + static_cast<double>(n) * c), +1});
      if (target > level) level = target;
    } else if (b < a) {
      const auto target = static_cast<long long>(std::ceil((b - l0) / c));
      for (long long n = level - 1; n >= target; --n) out.push_back({time_at(l0 + static_cast<double>(n) * c), -1});
      if (target < level) level = target;
    }
  }
  return out;
}

}  // namespace oracle
