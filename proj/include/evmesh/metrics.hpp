#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evmesh/grid.hpp"
#include "evmesh/meshflow.hpp"

namespace evmesh {

/// Valid-pixel mask, nonzero = evaluated.
struct EvalMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> valid;

  static EvalMask full(int width, int height);
  std::size_t count() const noexcept;
};

/// Mean endpoint error over valid pixels. A missing mask means every pixel.
double epe(const DenseFlow& pred, const DenseFlow& gt, const std::optional<EvalMask>& mask = std::nullopt);

/// Percentage of valid pixels whose endpoint error exceeds n px.
double npe(const DenseFlow& pred, const DenseFlow& gt, double n, const std::optional<EvalMask>& mask = std::nullopt);

/// Mean angle in degrees between (u, v, 1) vectors of pred and gt. Not
/// invariant to scaling the flows.
double angular_error(const DenseFlow& pred, const DenseFlow& gt, const std::optional<EvalMask>& mask = std::nullopt);

/// Percentage of valid pixels with error > 3 px or > 5% of |gt| at that pixel.
double outlier_pct(const DenseFlow& pred, const DenseFlow& gt, const std::optional<EvalMask>& mask = std::nullopt);

struct MetricRow {
  std::string sequence;
  std::string metric;
  double value = 0.0;
};

struct MetricOptions {
  std::vector<double> npe_thresholds{1.0, 2.0, 3.0};
  bool epe = true;
  bool angular = true;
  bool outliers = true;
};

/// EPE, NPE at each threshold (named "1PE", "2PE", ...), AE and %Out.
std::vector<MetricRow> evaluate_flow(std::string_view sequence, const DenseFlow& pred, const DenseFlow& gt,
                                     const MetricOptions& options = {},
                                     const std::optional<EvalMask>& mask = std::nullopt);

/// Upsamples both meshes to height x width before evaluate_flow.
std::vector<MetricRow> evaluate_meshflow(std::string_view sequence, const MeshFlow& pred, const MeshFlow& gt, int height,
                                         int width, const MetricOptions& options = {},
                                         const std::optional<EvalMask>& mask = std::nullopt);

/// "sequence,metric,value" header then one line per row.
std::string metrics_csv(const std::vector<MetricRow>& rows);

}  // namespace evmesh
