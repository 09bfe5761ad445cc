#pragma once

#include <cstddef>
#include <vector>

#include "evmesh/grid.hpp"

namespace evmesh {

/// Channel-major C x H x W feature tensor.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, float fill = 0.0F)
      : channels(c), height(h), width(w), values(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(height) * width; }
  float* channel(int c) noexcept { return values.data() + static_cast<std::size_t>(c) * plane_size(); }
  const float* channel(int c) const noexcept { return values.data() + static_cast<std::size_t>(c) * plane_size(); }
  float& at(int c, int y, int x) noexcept { return channel(c)[static_cast<std::size_t>(y) * width + x]; }
  float at(int c, int y, int x) const noexcept { return channel(c)[static_cast<std::size_t>(y) * width + x]; }
  bool same_shape(const FeatureMap& o) const noexcept {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

struct Offset {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

/// Square (2r+1)^2 search window with an on/off mask per offset.
struct SearchGrid {
  int radius = 0;
  std::vector<unsigned char> mask;  // row-major over dy, then dx, from -r to r
  std::vector<Offset> active;       // offsets with mask 1, in mask order

  int side() const noexcept { return 2 * radius + 1; }
  std::size_t active_count() const noexcept { return active.size(); }
  bool enabled(int dx, int dy) const noexcept {
    return mask[static_cast<std::size_t>(dy + radius) * side() + static_cast<std::size_t>(dx + radius)] != 0;
  }
};

/// Every offset of the (2r+1)^2 window.
SearchGrid full_grid(int radius);

/// Dilated grid: offset (dx, dy) is skipped iff |dx| + |dy| = 2k for an
/// integer k in [2, r]. Dense near the center, sparse at range.
SearchGrid dilated_mask(int radius);

/// Scores laid out offset-major: values[m * H * W + y * W + x].
struct CostVolume {
  int height = 0;
  int width = 0;
  std::vector<Offset> offsets;
  std::vector<float> values;

  const float* plane(std::size_t m) const noexcept { return values.data() + m * static_cast<std::size_t>(height) * width; }
  float at(std::size_t m, int y, int x) const noexcept { return plane(m)[static_cast<std::size_t>(y) * width + x]; }
};

enum class CorrelationNorm {
  kActiveCount,   // divide by the number of active offsets M
  kFeatureDim,    // divide by the channel count
  kNone,          // raw inner products
};

/// C(u, d) = <A(u), B(u + d)> / M for every active offset d; reads of B
/// outside the map are zero.
CostVolume correlate(const FeatureMap& a, const FeatureMap& b, const SearchGrid& grid,
                     CorrelationNorm norm = CorrelationNorm::kActiveCount);

/// Non-overlapping k x k average pooling; trailing partial windows are dropped.
FeatureMap average_pool(const FeatureMap& feat, int factor);

/// Backward warp per channel at u + flow(u), bilinear, clamped to the edge.
FeatureMap warp_features(const FeatureMap& feat, const DenseFlow& flow);

/// Elementwise correction + upsampled previous flow.
DenseFlow residual_update(const DenseFlow& correction, const DenseFlow& upsampled_prev);

}  // namespace evmesh
