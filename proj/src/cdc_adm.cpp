#include "evmesh/cdc_adm.hpp"

#include <algorithm>
#include <cmath>

#include "evmesh/error.hpp"
#include "evmesh/sampling.hpp"
#include "evmesh/simd/kernels.hpp"

namespace evmesh {
namespace {

void check_window(int kernel, const char* stage) {
  if (kernel < 1 || kernel % 2 == 0) throw ParameterError(stage, "attention window must be odd and positive");
}

}  // namespace

AttentionOperator AttentionOperator::identity(int height, int width, int kernel) {
  check_window(kernel, "attention");
  AttentionOperator a{kernel, height, width, {}};
  a.weights.assign(static_cast<std::size_t>(height) * width * a.taps(), 0.0F);
  const std::size_t center = a.taps() / 2;
  for (std::size_t p = 0; p < static_cast<std::size_t>(height) * width; ++p) a.weights[p * a.taps() + center] = 1.0F;
  return a;
}

AttentionOperator AttentionOperator::box(int height, int width, int kernel) {
  check_window(kernel, "attention");
  AttentionOperator a{kernel, height, width, {}};
  a.weights.assign(static_cast<std::size_t>(height) * width * a.taps(), static_cast<float>(1.0 / a.taps()));
  return a;
}

AttentionOperator AttentionOperator::from_logits(int height, int width, int kernel, std::span<const float> logits) {
  check_window(kernel, "attention");
  AttentionOperator a{kernel, height, width, {}};
  if (logits.size() != static_cast<std::size_t>(height) * width * a.taps()) {
    throw ShapeError("attention", "logit count does not match the window layout");
  }
  a.weights.resize(logits.size());
  const std::size_t taps = a.taps();
  for (std::size_t p = 0; p < static_cast<std::size_t>(height) * width; ++p) {
    const float* row = logits.data() + p * taps;
    const float peak = *std::max_element(row, row + taps);
    double total = 0.0;
    for (std::size_t k = 0; k < taps; ++k) total += std::exp(static_cast<double>(row[k]) - peak);
    for (std::size_t k = 0; k < taps; ++k) {
      a.weights[p * taps + k] = static_cast<float>(std::exp(static_cast<double>(row[k]) - peak) / total);
    }
  }
  return a;
}

void validate_attention(const AttentionOperator& a) {
  check_window(a.kernel, "attention");
  const std::size_t taps = a.taps();
  if (a.weights.size() != static_cast<std::size_t>(a.height) * a.width * taps) {
    throw ShapeError("attention", "weight count does not match the window layout");
  }
  for (std::size_t p = 0; p < static_cast<std::size_t>(a.height) * a.width; ++p) {
    double total = 0.0;
    for (std::size_t k = 0; k < taps; ++k) {
      const float w = a.weights[p * taps + k];
      if (!(w >= 0.0F) || !std::isfinite(w)) throw DataError("attention", "weights must be non-negative and finite");
      total += w;
    }
    if (std::fabs(total - 1.0) > 1e-5) throw DataError("attention", "weights must sum to one per pixel");
  }
}

DenseFlow upsample_flow_bilinear(const DenseFlow& flow, int factor) {
  if (factor < 1) throw ParameterError("upsample_flow_bilinear", "factor must be at least 1");
  if (flow.empty()) throw ShapeError("upsample_flow_bilinear", "flow is empty");
  DenseFlow out(flow.width * factor, flow.height * factor);
  const double f = factor;
  for (int y = 0; y < out.height; ++y) {
    const double sy = (y + 0.5) / f - 0.5;
    for (int x = 0; x < out.width; ++x) {
      const double sx = (x + 0.5) / f - 0.5;
      const double u = sample_bilinear_clamped(flow.u.data(), flow.width, flow.height, sx, sy);
      const double v = sample_bilinear_clamped(flow.v.data(), flow.width, flow.height, sx, sy);
      out.set(x, y, {static_cast<float>(u * f), static_cast<float>(v * f)});
    }
  }
  return out;
}

DenseFlow apply_attention(const AttentionOperator& a, const DenseFlow& flow) {
  if (a.height != flow.height || a.width != flow.width) throw ShapeError("apply_attention", "attention size differs from flow");
  const int r = a.radius();
  const std::size_t taps = a.taps();
  DenseFlow out(flow.width, flow.height);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const float* w = a.weights.data() + flow.index(x, y) * taps;
      double su = 0.0;
      double sv = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = std::clamp(y + dy, 0, flow.height - 1);
        for (int dx = -r; dx <= r; ++dx) {
          const float wk = w[static_cast<std::size_t>(dy + r) * a.kernel + static_cast<std::size_t>(dx + r)];
          if (wk == 0.0F) continue;
          const int xx = std::clamp(x + dx, 0, flow.width - 1);
          const Vec2f f = flow.at(xx, yy);
          su += static_cast<double>(wk) * f.x;
          sv += static_cast<double>(wk) * f.y;
        }
      }
      out.set(x, y, {static_cast<float>(su), static_cast<float>(sv)});
    }
  }
  return out;
}

DenseFlow cdc_fuse(const DenseFlow& coarse, const DenseFlow& correction, const AttentionOperator& attention,
                   double alpha, CorrectionMode mode) {
  if (!coarse.same_shape(correction)) throw ShapeError("cdc_fuse", "coarse and correction flows differ in size");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("cdc_fuse", "alpha must lie in [0, 1]");
  validate_attention(attention);

  DenseFlow corrected(coarse.width, coarse.height);
  if (mode == CorrectionMode::kAdditive) {
    simd::kernels().add(corrected.u.data(), coarse.u.data(), correction.u.data(), coarse.size());
    simd::kernels().add(corrected.v.data(), coarse.v.data(), correction.v.data(), coarse.size());
  } else {
    for (int y = 0; y < coarse.height; ++y) {
      for (int x = 0; x < coarse.width; ++x) {
        const Vec2f d = correction.at(x, y);
        const double sx = x + static_cast<double>(d.x);
        const double sy = y + static_cast<double>(d.y);
        corrected.set(x, y,
                      {static_cast<float>(sample_bilinear_clamped(coarse.u.data(), coarse.width, coarse.height, sx, sy)),
                       static_cast<float>(sample_bilinear_clamped(coarse.v.data(), coarse.width, coarse.height, sx, sy))});
      }
    }
  }
  const DenseFlow attended = apply_attention(attention, coarse);

  DenseFlow out(coarse.width, coarse.height);
  const auto a = static_cast<float>(alpha);
  const auto& k = simd::kernels();
  k.lerp(out.u.data(), corrected.u.data(), attended.u.data(), a, out.size());
  k.lerp(out.v.data(), corrected.v.data(), attended.v.data(), a, out.size());
  return out;
}

DenseFlow confidence_fuse(const DenseFlow& coarse, const DenseFlow& fine, const ConfidenceMap& confidence) {
  if (!coarse.same_shape(fine)) throw ShapeError("confidence_fuse", "flow sizes differ");
  const auto& w = confidence.weights;
  if (w.width != coarse.width || w.height != coarse.height) throw ShapeError("confidence_fuse", "confidence size differs");
  for (float c : w.values) {
    if (!(c >= 0.0F && c <= 1.0F)) throw DataError("confidence_fuse", "confidence values must lie in [0, 1]");
  }
  DenseFlow out(coarse.width, coarse.height);
  const auto& k = simd::kernels();
  k.blend(out.u.data(), coarse.u.data(), fine.u.data(), w.values.data(), out.size());
  k.blend(out.v.data(), coarse.v.data(), fine.v.data(), w.values.data(), out.size());
  return out;
}

double mdc_loss(std::span<const VoxelGrid> preds, std::span<const VoxelGrid> gts, double xi) {
  if (preds.size() != gts.size() || preds.empty()) throw ShapeError("mdc_loss", "need matching, non-empty scale lists");
  if (!(xi >= 0.0)) throw ParameterError("mdc_loss", "xi must be non-negative");
  const auto& k = simd::kernels();
  double total = 0.0;
  for (std::size_t s = 0; s < preds.size(); ++s) {
    if (!preds[s].same_shape(gts[s]) || preds[s].values.empty()) {
      throw ShapeError("mdc_loss", "scale " + std::to_string(s) + " shape mismatch");
    }
    const std::size_t n = preds[s].values.size();
    total += k.charbonnier_sum(preds[s].values.data(), gts[s].values.data(), n, xi) / static_cast<double>(n);
  }
  return total;
}

double mds_loss(const VoxelGrid& adjusted, const VoxelGrid& reference) {
  return std::fabs(density(adjusted) - density(reference));
}

double total_loss(double l_mdc, double l_mds, double l_flow, double lambda1, double lambda2) {
  return lambda1 * l_mdc + lambda2 * l_mds + l_flow;
}

VoxelGrid mds_fuse(const VoxelGrid& changed, const VoxelGrid& original, const FeatureMap& logits) {
  if (!changed.same_shape(original)) throw ShapeError("mds_fuse", "representations differ in shape");
  if (logits.channels != 2 || logits.height != changed.height || logits.width != changed.width) {
    throw ShapeError("mds_fuse", "logits must be 2 x H x W");
  }
  const std::size_t plane = changed.plane_size();
  std::vector<float> w_changed(plane);
  for (std::size_t i = 0; i < plane; ++i) {
    const double diff = static_cast<double>(logits.channel(1)[i]) - static_cast<double>(logits.channel(0)[i]);
    w_changed[i] = static_cast<float>(1.0 / (1.0 + std::exp(diff)));
  }
  VoxelGrid out(changed.bins, changed.height, changed.width);
  const auto& k = simd::kernels();
  for (int b = 0; b < changed.bins; ++b) k.blend(out.plane(b), changed.plane(b), original.plane(b), w_changed.data(), plane);
  return out;
}

}  // namespace evmesh
