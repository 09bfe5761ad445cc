#pragma once

#include <span>
#include <vector>

#include "evmesh/correlation.hpp"
#include "evmesh/grid.hpp"
#include "evmesh/representation.hpp"

namespace evmesh {

/// Per-pixel row-stochastic weights over a K x K window (K odd), laid out
/// pixel-major: weights[(y * W + x) * K * K + (dy + r) * K + (dx + r)].
struct AttentionOperator {
  int kernel = 7;
  int height = 0;
  int width = 0;
  std::vector<float> weights;

  int radius() const noexcept { return kernel / 2; }
  std::size_t taps() const noexcept { return static_cast<std::size_t>(kernel) * kernel; }

  /// All weight on the center tap.
  static AttentionOperator identity(int height, int width, int kernel = 7);
  /// Equal weight on every tap.
  static AttentionOperator box(int height, int width, int kernel);
  /// Softmax over each pixel's taps; `logits` uses the weight layout.
  static AttentionOperator from_logits(int height, int width, int kernel, std::span<const float> logits);
};

/// Throws ParameterError for an even or non-positive window, ShapeError
/// for a size mismatch, DataError for negative weights or rows not summing
/// to one (tolerance 1e-5).
void validate_attention(const AttentionOperator& attention);

/// Values in [0, 1]; brighter means the coarse flow is trusted.
struct ConfidenceMap {
  ImageF weights;
};

struct LossWeights {
  double alpha = 0.6;
  double xi = 1e-3;
  double lambda1 = 0.1;
  double lambda2 = 10.0;
};

/// Spatial upsampling by an integer factor (pixel-center aligned) with the
/// vectors rescaled by the same factor.
DenseFlow upsample_flow_bilinear(const DenseFlow& flow, int factor);

/// How the correction flow is applied to the coarse flow in cdc_fuse.
enum class CorrectionMode {
  kWarp,      // resample F_bar at u + dF(u)
  kAdditive,  // F_bar + dF
};

/// Applies the attention weights to a flow field (edge-clamped window).
DenseFlow apply_attention(const AttentionOperator& attention, const DenseFlow& flow);

/// F_tilde = alpha * W(F_bar, dF) + (1 - alpha) * (A applied to F_bar).
DenseFlow cdc_fuse(const DenseFlow& coarse, const DenseFlow& correction, const AttentionOperator& attention,
                   double alpha = LossWeights{}.alpha, CorrectionMode mode = CorrectionMode::kWarp);

/// F_up = W * F_bar + (1 - W) * F_tilde, per pixel and component.
DenseFlow confidence_fuse(const DenseFlow& coarse, const DenseFlow& fine, const ConfidenceMap& confidence);

/// Sum over scales of the mean Charbonnier penalty sqrt(d^2 + xi^2).
double mdc_loss(std::span<const VoxelGrid> preds, std::span<const VoxelGrid> gts, double xi = LossWeights{}.xi);

/// |density(adjusted) - density(reference)|.
double mds_loss(const VoxelGrid& adjusted, const VoxelGrid& reference);

double total_loss(double l_mdc, double l_mds, double l_flow, double lambda1 = LossWeights{}.lambda1,
                  double lambda2 = LossWeights{}.lambda2);

/// Per-pixel softmax over the two logit planes; channel 0 weights `changed`,
/// channel 1 weights `original`. The weights are shared by every bin.
VoxelGrid mds_fuse(const VoxelGrid& changed, const VoxelGrid& original, const FeatureMap& logits);

}  // namespace evmesh
