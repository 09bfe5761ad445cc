#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evmesh/grid.hpp"

namespace evmesh {

class Scene;

struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int64_t t = 0;  // microseconds
  std::int8_t p = 1;   // -1 or +1

  friend bool operator==(const Event&, const Event&) = default;
};

/// Canonical stream order: time, then row, column, polarity.
inline bool event_less(const Event& a, const Event& b) noexcept {
  if (a.t != b.t) return a.t < b.t;
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.p < b.p;
}

struct EventStream {
  int width = 0;
  int height = 0;
  std::int64_t t_start = 0;  // microseconds
  std::int64_t t_end = 0;
  std::vector<Event> events;

  std::size_t size() const noexcept { return events.size(); }
  bool empty() const noexcept { return events.empty(); }
};

/// Throws DataError if an event is off-sensor, has a bad polarity, lies
/// outside [t_start, t_end], or breaks the time order.
void validate_stream(const EventStream& stream);

struct FrameSequence {
  std::vector<IntensityFrame> frames;

  int width() const noexcept { return frames.empty() ? 0 : frames.front().width(); }
  int height() const noexcept { return frames.empty() ? 0 : frames.front().height(); }
};

/// Throws ShapeError for fewer than two frames or mixed sizes, DataError
/// for non-increasing timestamps.
void validate_frames(const FrameSequence& frames);

/// Renders one frame of `scene` per timestamp (seconds).
FrameSequence render_sequence(const Scene& scene, std::span<const double> timestamps);

std::int64_t seconds_to_us(double seconds);

/// Ideal threshold-crossing event generation.
///
/// Each pixel keeps a reference level R = L_0 + m*C on its log intensity,
/// which is treated as linear in time between frames. Every crossing of
/// R + C (rising) or R - C (falling) emits one event at the interpolated
/// time, rounded half-to-even to a microsecond, and moves R by one step;
/// sub-threshold residue carries across frames.
EventStream simulate(const FrameSequence& frames, double threshold);

/// One stream per threshold, each identical to simulate(frames, C).
std::vector<EventStream> multi_density_sweep(const FrameSequence& frames, std::span<const double> thresholds);

struct SubsampleOptions {
  double keep_ratio = 1.0;  // in (0, 1]
  double tolerance = 0.5;   // px; infinity disables the trajectory test
};

/// Seed-lattice spacing used for a spatial keep ratio.
int seed_spacing(double keep_ratio);

/// Keeps events lying within `tolerance` of the straight trajectory
/// u + s * F(u) of some seed pixel u, where s is the event's normalized
/// time in the stream and seeds form a lattice at phase (0, 0) whose
/// density approximates keep_ratio. keep_ratio = 1 keeps every event.
EventStream spatial_guided_subsample(const EventStream& stream, const DenseFlow& flow,
                                     const SubsampleOptions& options = {});

/// Keeps a uniform keep_ratio fraction of the distinct timestamps; events at
/// kept timestamps survive if some pixel's trajectory passes within
/// `tolerance` of them at that time.
EventStream temporal_guided_subsample(const EventStream& stream, const DenseFlow& flow,
                                      const SubsampleOptions& options = {});

}  // namespace evmesh
