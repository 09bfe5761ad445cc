#include "evmesh/correlation.hpp"

#include <algorithm>
#include <cstdlib>

#include "evmesh/error.hpp"
#include "evmesh/parallel.hpp"
#include "evmesh/sampling.hpp"
#include "evmesh/simd/kernels.hpp"

namespace evmesh {
namespace {

SearchGrid build_grid(int radius, bool dilated) {
  if (radius < 0) throw ParameterError("search_grid", "radius must be non-negative");
  SearchGrid grid;
  grid.radius = radius;
  grid.mask.assign(static_cast<std::size_t>(grid.side()) * grid.side(), 1);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int manhattan = std::abs(dx) + std::abs(dy);
      const bool skip = dilated && manhattan % 2 == 0 && manhattan >= 4 && manhattan <= 2 * radius;
      grid.mask[static_cast<std::size_t>(dy + radius) * grid.side() + static_cast<std::size_t>(dx + radius)] =
          skip ? 0 : 1;
      if (!skip) grid.active.push_back({dx, dy});
    }
  }
  return grid;
}

}  // namespace

SearchGrid full_grid(int radius) { return build_grid(radius, false); }

SearchGrid dilated_mask(int radius) { return build_grid(radius, true); }

CostVolume correlate(const FeatureMap& a, const FeatureMap& b, const SearchGrid& grid, CorrelationNorm norm) {
  if (!a.same_shape(b)) throw ShapeError("correlate", "feature maps differ in shape");
  if (grid.active.empty()) throw ParameterError("correlate", "search grid has no active offsets");
  CostVolume cv;
  cv.height = a.height;
  cv.width = a.width;
  cv.offsets = grid.active;
  const std::size_t plane = a.plane_size();
  cv.values.assign(plane * cv.offsets.size(), 0.0F);
  double divisor = 1.0;
  if (norm == CorrelationNorm::kActiveCount) divisor = static_cast<double>(grid.active_count());
  if (norm == CorrelationNorm::kFeatureDim) divisor = std::max(1.0, static_cast<double>(a.channels));
  const auto scale = static_cast<float>(1.0 / divisor);

  parallel_for(cv.offsets.size(), [&](std::size_t m0, std::size_t m1) {
    const auto& k = simd::kernels();
    for (std::size_t m = m0; m < m1; ++m) {
      const Offset d = cv.offsets[m];
      float* out = cv.values.data() + m * plane;
      // Columns x with 0 <= x + dx < W; everything else stays zero.
      const int x0 = std::max(0, -d.dx);
      const int x1 = std::min(a.width, a.width - d.dx);
      if (x1 <= x0) continue;
      const auto run = static_cast<std::size_t>(x1 - x0);
      for (int y = 0; y < a.height; ++y) {
        const int yb = y + d.dy;
        if (yb < 0 || yb >= a.height) continue;
        float* row = out + static_cast<std::size_t>(y) * a.width + x0;
        for (int c = 0; c < a.channels; ++c) {
          const float* ra = a.channel(c) + static_cast<std::size_t>(y) * a.width + x0;
          const float* rb = b.channel(c) + static_cast<std::size_t>(yb) * a.width + x0 + d.dx;
          k.mul_acc(row, ra, rb, run);
        }
      }
      if (norm != CorrelationNorm::kNone) k.scale(out, out, scale, plane);
    }
  });
  return cv;
}

FeatureMap average_pool(const FeatureMap& feat, int factor) {
  if (factor < 1) throw ParameterError("average_pool", "factor must be at least 1");
  const int h = feat.height / factor;
  const int w = feat.width / factor;
  if (h == 0 || w == 0) throw ShapeError("average_pool", "feature map smaller than the pooling window");
  FeatureMap out(feat.channels, h, w);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int c = 0; c < feat.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) s += feat.at(c, y * factor + dy, x * factor + dx);
        }
        out.at(c, y, x) = static_cast<float>(s * inv);
      }
    }
  }
  return out;
}

FeatureMap warp_features(const FeatureMap& feat, const DenseFlow& flow) {
  if (flow.width != feat.width || flow.height != feat.height) {
    throw ShapeError("warp_features", "flow resolution differs from the features");
  }
  FeatureMap out(feat.channels, feat.height, feat.width);
  for (int c = 0; c < feat.channels; ++c) {
    const float* src = feat.channel(c);
    for (int y = 0; y < feat.height; ++y) {
      for (int x = 0; x < feat.width; ++x) {
        const Vec2f f = flow.at(x, y);
        out.at(c, y, x) = static_cast<float>(sample_bilinear_clamped(
            src, feat.width, feat.height, x + static_cast<double>(f.x), y + static_cast<double>(f.y)));
      }
    }
  }
  return out;
}

DenseFlow residual_update(const DenseFlow& correction, const DenseFlow& upsampled_prev) {
  if (!correction.same_shape(upsampled_prev)) throw ShapeError("residual_update", "flow sizes differ");
  DenseFlow out(correction.width, correction.height);
  const auto& k = simd::kernels();
  k.add(out.u.data(), correction.u.data(), upsampled_prev.u.data(), out.size());
  k.add(out.v.data(), correction.v.data(), upsampled_prev.v.data(), out.size());
  return out;
}

}  // namespace evmesh
