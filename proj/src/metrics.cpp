#include "evmesh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "evmesh/config.hpp"
#include "evmesh/error.hpp"
#include "evmesh/simd/kernels.hpp"

namespace evmesh {

EvalMask EvalMask::full(int width, int height) {
  return {width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 1)};
}

std::size_t EvalMask::count() const noexcept {
  return static_cast<std::size_t>(std::count_if(valid.begin(), valid.end(), [](std::uint8_t m) { return m != 0; }));
}

namespace {

// Validates shapes and returns the number of valid pixels.
std::size_t check(const DenseFlow& pred, const DenseFlow& gt, const std::optional<EvalMask>& mask, const char* stage) {
  if (!pred.same_shape(gt)) throw ShapeError(stage, "prediction and ground truth differ in size");
  if (pred.empty()) throw DataError(stage, "flow is empty");
  if (!mask) return pred.size();
  if (mask->width != pred.width || mask->height != pred.height || mask->valid.size() != pred.size()) {
    throw ShapeError(stage, "mask size differs from the flow");
  }
  const std::size_t n = mask->count();
  if (n == 0) throw DataError(stage, "mask has no valid pixel");
  return n;
}

bool is_valid(const std::optional<EvalMask>& mask, std::size_t i) { return !mask || mask->valid[i] != 0; }

std::vector<double> endpoint_errors(const DenseFlow& pred, const DenseFlow& gt) {
  std::vector<double> err(pred.size());
  simd::kernels().endpoint_error(err.data(), pred.u.data(), pred.v.data(), gt.u.data(), gt.v.data(), pred.size());
  return err;
}

}  // namespace

double epe(const DenseFlow& pred, const DenseFlow& gt, const std::optional<EvalMask>& mask) {
  const std::size_t n = check(pred, gt, mask, "epe");
  const auto err = endpoint_errors(pred, gt);
  double total = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (is_valid(mask, i)) total += err[i];
  }
  return total / static_cast<double>(n);
}

double npe(const DenseFlow& pred, const DenseFlow& gt, double n_px, const std::optional<EvalMask>& mask) {
  const std::size_t n = check(pred, gt, mask, "npe");
  if (!(n_px >= 0.0)) throw ParameterError("npe", "threshold must be non-negative");
  const auto err = endpoint_errors(pred, gt);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (is_valid(mask, i) && err[i] > n_px) ++bad;
  }
  return 100.0 * static_cast<double>(bad) / static_cast<double>(n);
}

double angular_error(const DenseFlow& pred, const DenseFlow& gt, const std::optional<EvalMask>& mask) {
  const std::size_t n = check(pred, gt, mask, "angular_error");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!is_valid(mask, i)) continue;
    const double pu = pred.u[i];
    const double pv = pred.v[i];
    const double gu = gt.u[i];
    const double gv = gt.v[i];
    const double dot = pu * gu + pv * gv + 1.0;
    const double norm = std::sqrt((pu * pu + pv * pv + 1.0) * (gu * gu + gv * gv + 1.0));
    total += std::acos(std::clamp(dot / norm, -1.0, 1.0));
  }
  return total / static_cast<double>(n) * 180.0 / std::numbers::pi;
}

double outlier_pct(const DenseFlow& pred, const DenseFlow& gt, const std::optional<EvalMask>& mask) {
  const std::size_t n = check(pred, gt, mask, "outlier_pct");
  const auto err = endpoint_errors(pred, gt);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (!is_valid(mask, i)) continue;
    const double mag = std::hypot(static_cast<double>(gt.u[i]), static_cast<double>(gt.v[i]));
    if (err[i] > 3.0 || err[i] > 0.05 * mag) ++bad;
  }
  return 100.0 * static_cast<double>(bad) / static_cast<double>(n);
}

std::vector<MetricRow> evaluate_flow(std::string_view sequence, const DenseFlow& pred, const DenseFlow& gt,
                                     const MetricOptions& options, const std::optional<EvalMask>& mask) {
  std::vector<MetricRow> rows;
  const std::string seq(sequence);
  if (options.epe) rows.push_back({seq, "EPE", epe(pred, gt, mask)});
  for (double n : options.npe_thresholds) rows.push_back({seq, format_double(n) + "PE", npe(pred, gt, n, mask)});
  if (options.angular) rows.push_back({seq, "AE", angular_error(pred, gt, mask)});
  if (options.outliers) rows.push_back({seq, "%Out", outlier_pct(pred, gt, mask)});
  return rows;
}

std::vector<MetricRow> evaluate_meshflow(std::string_view sequence, const MeshFlow& pred, const MeshFlow& gt, int height,
                                         int width, const MetricOptions& options, const std::optional<EvalMask>& mask) {
  if (pred.spec.cells_x != gt.spec.cells_x || pred.spec.cells_y != gt.spec.cells_y) {
    throw ShapeError("evaluate_meshflow", "meshes differ in cell layout");
  }
  return evaluate_flow(sequence, upsample_bilinear(pred, height, width), upsample_bilinear(gt, height, width), options,
                       mask);
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out = "sequence,metric,value\n";
  for (const auto& r : rows) {
    out += r.sequence;
    out += ',';
    out += r.metric;
    out += ',';
    out += format_double(r.value);
    out += '\n';
  }
  return out;
}

}  // namespace evmesh
