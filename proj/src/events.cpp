#include "evmesh/events.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evmesh/error.hpp"
#include "evmesh/parallel.hpp"
#include "evmesh/scene.hpp"

namespace evmesh {

void validate_stream(const EventStream& stream) {
  const Event* prev = nullptr;
  for (const Event& e : stream.events) {
    if (e.x >= stream.width || e.y >= stream.height) throw DataError("event_stream", "event outside the sensor");
    if (e.p != 1 && e.p != -1) throw DataError("event_stream", "polarity must be -1 or +1");
    if (e.t < stream.t_start || e.t > stream.t_end) throw DataError("event_stream", "event time outside the stream interval");
    if (prev != nullptr && e.t < prev->t) throw DataError("event_stream", "events are not time ordered");
    prev = &e;
  }
}

void validate_frames(const FrameSequence& seq) {
  if (seq.frames.size() < 2) throw ShapeError("simulate", "need at least two frames");
  const int w = seq.width();
  const int h = seq.height();
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    const auto& f = seq.frames[k];
    if (f.width() != w || f.height() != h || f.image.size() != static_cast<std::size_t>(w) * h) {
      throw ShapeError("simulate", "frame " + std::to_string(k) + " has mismatched dimensions");
    }
    if (k > 0 && !(f.timestamp > seq.frames[k - 1].timestamp)) {
      throw DataError("simulate", "frame timestamps must be strictly increasing");
    }
  }
}

FrameSequence render_sequence(const Scene& scene, std::span<const double> timestamps) {
  FrameSequence seq;
  seq.frames.reserve(timestamps.size());
  for (double t : timestamps) seq.frames.push_back(render_frame(scene, t));
  return seq;
}

std::int64_t seconds_to_us(double seconds) { return static_cast<std::int64_t>(std::nearbyint(seconds * 1e6)); }

EventStream simulate(const FrameSequence& seq, double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw ParameterError("simulate", "threshold C must be positive");
  validate_frames(seq);

  const int w = seq.width();
  const int h = seq.height();
  const std::size_t n_frames = seq.frames.size();
  std::vector<double> times_us(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) times_us[k] = seq.frames[k].timestamp * 1e6;

  EventStream out;
  out.width = w;
  out.height = h;
  out.t_start = seconds_to_us(seq.frames.front().timestamp);
  out.t_end = seconds_to_us(seq.frames.back().timestamp);

  for (const auto& f : seq.frames) {
    for (float v : f.image.values) {
      if (!(v > 0.0F) || !std::isfinite(v)) throw DataError("simulate", "intensities must be positive and finite");
    }
  }

  std::vector<std::vector<Event>> per_row(static_cast<std::size_t>(h));
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t y0, std::size_t y1) {
    std::vector<double> log_trace(n_frames);
    for (std::size_t y = y0; y < y1; ++y) {
      auto& row_events = per_row[y];
      for (int x = 0; x < w; ++x) {
        for (std::size_t k = 0; k < n_frames; ++k) {
          log_trace[k] = std::log(static_cast<double>(seq.frames[k].image(x, static_cast<int>(y))));
        }
        const double base = log_trace[0];
        std::int64_t level = 0;
        const auto emit = [&](std::size_t k, double crossing, std::int8_t polarity) {
          const double a = log_trace[k];
          const double b = log_trace[k + 1];
          const double frac = (crossing - a) / (b - a);
          const double t_us = times_us[k] + frac * (times_us[k + 1] - times_us[k]);
          auto t = static_cast<std::int64_t>(std::nearbyint(t_us));
          t = std::clamp(t, out.t_start, out.t_end);
          row_events.push_back({static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), t, polarity});
        };
        for (std::size_t k = 0; k + 1 < n_frames; ++k) {
          const double b = log_trace[k + 1];
          if (b > log_trace[k]) {
            while (b >= base + static_cast<double>(level + 1) * threshold) {
              ++level;
              emit(k, base + static_cast<double>(level) * threshold, 1);
            }
          } else if (b < log_trace[k]) {
            while (b <= base + static_cast<double>(level - 1) * threshold) {
              --level;
              emit(k, base + static_cast<double>(level) * threshold, -1);
            }
          }
        }
      }
    }
  });

  std::size_t total = 0;
  for (const auto& r : per_row) total += r.size();
  out.events.reserve(total);
  for (auto& r : per_row) out.events.insert(out.events.end(), r.begin(), r.end());
  std::sort(out.events.begin(), out.events.end(), event_less);
  return out;
}

std::vector<EventStream> multi_density_sweep(const FrameSequence& frames, std::span<const double> thresholds) {
  if (thresholds.empty()) throw ParameterError("multi_density_sweep", "threshold list is empty");
  for (double c : thresholds) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("multi_density_sweep", "thresholds must be positive");
  }
  std::vector<EventStream> out;
  out.reserve(thresholds.size());
  for (double c : thresholds) out.push_back(simulate(frames, c));
  return out;
}

namespace {

void check_subsample_inputs(const EventStream& stream, const DenseFlow& flow, const SubsampleOptions& opt,
                            const char* stage) {
  if (!(opt.keep_ratio > 0.0 && opt.keep_ratio <= 1.0)) throw ParameterError(stage, "keep_ratio must lie in (0, 1]");
  if (!(opt.tolerance >= 0.0)) throw ParameterError(stage, "tolerance must be non-negative");
  if (flow.width != stream.width || flow.height != stream.height) {
    throw ShapeError(stage, "flow does not cover the sensor");
  }
  if (!flow.all_finite()) throw DataError(stage, "flow contains non-finite values");
}

double normalized_time(const EventStream& stream, std::int64_t t) {
  if (stream.t_end == stream.t_start) return 0.0;
  return static_cast<double>(t - stream.t_start) / static_cast<double>(stream.t_end - stream.t_start);
}

// Seeds on a lattice of the given spacing, each moving along u + s * F(u).
class SeedTrajectories {
 public:
  SeedTrajectories(const DenseFlow& flow, int spacing) : flow_(flow), spacing_(spacing) {
    for (std::size_t i = 0; i < flow.size(); ++i) {
      max_u_ = std::max(max_u_, static_cast<double>(std::fabs(flow.u[i])));
      max_v_ = std::max(max_v_, static_cast<double>(std::fabs(flow.v[i])));
    }
  }

  bool near(double x, double y, double s, double tolerance) const {
    const double tol2 = tolerance * tolerance;
    const double reach_x = tolerance + s * max_u_;
    const double reach_y = tolerance + s * max_v_;
    const int gx0 = std::max(0, static_cast<int>(std::ceil((x - reach_x) / spacing_)));
    const int gy0 = std::max(0, static_cast<int>(std::ceil((y - reach_y) / spacing_)));
    const int gx1 = std::min((flow_.width - 1) / spacing_, static_cast<int>(std::floor((x + reach_x) / spacing_)));
    const int gy1 = std::min((flow_.height - 1) / spacing_, static_cast<int>(std::floor((y + reach_y) / spacing_)));
    for (int gy = gy0; gy <= gy1; ++gy) {
      for (int gx = gx0; gx <= gx1; ++gx) {
        const int sx = gx * spacing_;
        const int sy = gy * spacing_;
        const Vec2f f = flow_.at(sx, sy);
        const double dx = sx + s * f.x - x;
        const double dy = sy + s * f.y - y;
        if (dx * dx + dy * dy <= tol2) return true;
      }
    }
    return false;
  }

 private:
  const DenseFlow& flow_;
  int spacing_;
  double max_u_ = 0.0;
  double max_v_ = 0.0;
};

}  // namespace

int seed_spacing(double keep_ratio) {
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) throw ParameterError("subsample", "keep_ratio must lie in (0, 1]");
  return std::max(1, static_cast<int>(std::lround(1.0 / std::sqrt(keep_ratio))));
}

EventStream spatial_guided_subsample(const EventStream& stream, const DenseFlow& flow, const SubsampleOptions& opt) {
  check_subsample_inputs(stream, flow, opt, "spatial_guided_subsample");
  if (opt.keep_ratio == 1.0 || !std::isfinite(opt.tolerance)) return stream;
  const SeedTrajectories seeds(flow, seed_spacing(opt.keep_ratio));
  EventStream out = stream;
  out.events.clear();
  for (const Event& e : stream.events) {
    if (seeds.near(e.x, e.y, normalized_time(stream, e.t), opt.tolerance)) out.events.push_back(e);
  }
  return out;
}

EventStream temporal_guided_subsample(const EventStream& stream, const DenseFlow& flow, const SubsampleOptions& opt) {
  check_subsample_inputs(stream, flow, opt, "temporal_guided_subsample");

  std::vector<std::int64_t> stamps;
  stamps.reserve(stream.size());
  for (const Event& e : stream.events) stamps.push_back(e.t);
  std::sort(stamps.begin(), stamps.end());
  stamps.erase(std::unique(stamps.begin(), stamps.end()), stamps.end());

  std::vector<std::int64_t> kept;
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    const auto before = std::floor(static_cast<double>(i) * opt.keep_ratio);
    const auto after = std::floor(static_cast<double>(i + 1) * opt.keep_ratio);
    if (after > before) kept.push_back(stamps[i]);
  }

  const bool check_space = std::isfinite(opt.tolerance);
  const SeedTrajectories seeds(flow, 1);
  EventStream out = stream;
  out.events.clear();
  for (const Event& e : stream.events) {
    if (!std::binary_search(kept.begin(), kept.end(), e.t)) continue;
    if (check_space && !seeds.near(e.x, e.y, normalized_time(stream, e.t), opt.tolerance)) continue;
    out.events.push_back(e);
  }
  return out;
}

}  // namespace evmesh
