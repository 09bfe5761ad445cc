#include "evmesh/representation.hpp"

#include <algorithm>
#include <cmath>

#include "evmesh/error.hpp"
#include "evmesh/simd/kernels.hpp"

namespace evmesh {

VoxelGrid voxelize(const EventStream& stream, int bins) {
  if (bins < 1) throw ParameterError("voxelize", "bins must be at least 1");
  if (stream.width <= 0 || stream.height <= 0) throw ShapeError("voxelize", "stream has no sensor size");
  VoxelGrid grid(bins, stream.height, stream.width);
  if (stream.empty()) return grid;

  // Deposit in canonical order so the float sums are order independent.
  const std::vector<Event>* events = &stream.events;
  std::vector<Event> sorted;
  if (!std::is_sorted(stream.events.begin(), stream.events.end(), event_less)) {
    sorted = stream.events;
    std::sort(sorted.begin(), sorted.end(), event_less);
    events = &sorted;
  }

  const std::int64_t t0 = events->front().t;
  const std::int64_t tn = events->back().t;
  const double span = static_cast<double>(tn - t0);
  std::vector<double> acc(grid.values.size(), 0.0);
  const std::size_t plane = grid.plane_size();
  for (const Event& e : *events) {
    if (e.x >= stream.width || e.y >= stream.height) throw DataError("voxelize", "event outside the sensor");
    const std::size_t pix = static_cast<std::size_t>(e.y) * stream.width + e.x;
    const double p = e.p;
    if (span <= 0.0) {
      acc[pix] += p;
      continue;
    }
    const double pos = static_cast<double>(e.t - t0) / span * (bins - 1);
    const int lo = std::clamp(static_cast<int>(std::floor(pos)), 0, bins - 1);
    for (int b = lo; b <= std::min(lo + 1, bins - 1); ++b) {
      const double w = std::max(0.0, 1.0 - std::fabs(b - pos));
      if (w > 0.0) acc[static_cast<std::size_t>(b) * plane + pix] += p * w;
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) grid.values[i] = static_cast<float>(acc[i]);
  return grid;
}

double density(const VoxelGrid& grid) {
  const std::size_t plane = grid.plane_size();
  if (plane == 0) return 0.0;
  std::vector<float> activity(plane, 0.0F);
  const auto& k = simd::kernels();
  for (int b = 0; b < grid.bins; ++b) k.abs_acc(activity.data(), grid.plane(b), plane);
  const auto active = std::count_if(activity.begin(), activity.end(), [](float a) { return a > 0.0F; });
  return static_cast<double>(active) / static_cast<double>(plane);
}

double occupancy_density(const EventStream& stream) {
  if (stream.width <= 0 || stream.height <= 0) return 0.0;
  std::vector<unsigned char> hit(static_cast<std::size_t>(stream.width) * stream.height, 0);
  for (const Event& e : stream.events) hit[static_cast<std::size_t>(e.y) * stream.width + e.x] = 1;
  const auto active = std::count(hit.begin(), hit.end(), 1);
  return static_cast<double>(active) / static_cast<double>(hit.size());
}

}  // namespace evmesh
