#pragma once

#include <cstddef>
#include <vector>

#include "evmesh/events.hpp"

namespace evmesh {

/// B x H x W signed event accumulation, bin-major.
struct VoxelGrid {
  int bins = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  VoxelGrid() = default;
  VoxelGrid(int b, int h, int w)
      : bins(b), height(h), width(w), values(static_cast<std::size_t>(b) * h * w, 0.0F) {}

  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(height) * width; }
  float* plane(int b) noexcept { return values.data() + static_cast<std::size_t>(b) * plane_size(); }
  const float* plane(int b) const noexcept { return values.data() + static_cast<std::size_t>(b) * plane_size(); }
  float& at(int b, int y, int x) noexcept { return plane(b)[static_cast<std::size_t>(y) * width + x]; }
  float at(int b, int y, int x) const noexcept { return plane(b)[static_cast<std::size_t>(y) * width + x]; }
  bool same_shape(const VoxelGrid& o) const noexcept {
    return bins == o.bins && height == o.height && width == o.width;
  }
};

inline constexpr int kDefaultBins = 5;

/// Temporal-bilinear voxel grid: an event at normalized time
/// tn = (t - t_0) / (t_N - t_0) * (B - 1) adds p * max(0, 1 - |b - tn|)
/// to bin b at its pixel, t_0/t_N being the earliest/latest event. When
/// every event shares one timestamp all mass goes to bin 0. The result does
/// not depend on event order.
VoxelGrid voxelize(const EventStream& stream, int bins = kDefaultBins);

/// Fraction of pixels whose activity sum_b |V(u, b)| is nonzero. Pixels
/// whose deposits cancel exactly count as empty.
double density(const VoxelGrid& grid);

/// Fraction of pixels that received at least one event, regardless of
/// polarity cancellation in the grid.
double occupancy_density(const EventStream& stream);

}  // namespace evmesh
