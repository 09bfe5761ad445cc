#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evmesh/cmax.hpp"
#include "evmesh/events.hpp"
#include "evmesh/meshflow.hpp"
#include "evmesh/metrics.hpp"
#include "evmesh/scene.hpp"

namespace evmesh {

// Pipeline config, key = value lines:
//   scene      = path to a scene config (relative to this file), or the
//                scene keys (width, height, motion, ...) given inline
//   seed       = texture seed; overrides the scene's own
//   thresholds = C_1 C_2 ...               (default 0.1 0.2 0.4)
//   bins       = B                         (default 5)
//   mesh       = cells_x cells_y           (default 16 16)
//   splat      = bilinear | nearest
//   metrics    = EPE 1PE 3PE AE %Out       (any subset; NPE thresholds as "<N>PE")
//   intervals  = number of equal labeled intervals over the scene duration
//   candidates = stream files for select
//   flow       = flow file for select
//   interval   = t_i t_j in seconds for select
//   flow_ppm   = 0 | 1                     (color visualizations in gen/meshflow)
//   out        = output directory
struct PipelineConfig {
  std::optional<Scene> scene;
  std::optional<std::uint64_t> seed;
  std::vector<double> thresholds{0.1, 0.2, 0.4};
  int bins = 5;
  MeshGridSpec mesh{};
  Splat splat = Splat::kBilinear;
  MetricOptions metrics{};
  int intervals = 1;
  std::vector<std::filesystem::path> candidates;
  std::optional<std::filesystem::path> flow;
  std::optional<std::pair<double, double>> interval;
  bool flow_ppm = false;
  std::filesystem::path out = "out";
};

/// Relative paths resolve against `base_dir`.
PipelineConfig parse_pipeline_config(std::string_view text, const std::filesystem::path& base_dir = ".");
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Replaces the texture seed (and the scene, if any) with `seed`.
void apply_seed(PipelineConfig& config, std::uint64_t seed);

/// Adaptive sampling times over the config's labeled intervals; the
/// boundary of consecutive intervals appears once.
std::vector<double> sample_times(const Scene& scene, int intervals);

/// Index of every file a command wrote, with per-file attributes.
/// Saved as <out>/manifest_<command>.txt.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)) {}

  void set(const std::string& key, const std::string& value);
  void add(const std::string& kind, const std::string& path,
           const std::vector<std::pair<std::string, std::string>>& attributes = {});

  const std::string& command() const noexcept { return command_; }
  std::vector<std::string> paths() const;
  std::string text() const;
  std::filesystem::path write(const std::filesystem::path& out_dir) const;

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> header_;
  std::vector<std::string> entries_;
  std::vector<std::string> paths_;
};

/// Manifest entry parsed back; attributes in file order.
struct ManifestEntry {
  std::string kind;
  std::string path;
  std::vector<std::pair<std::string, std::string>> attributes;

  std::optional<std::string> attribute(std::string_view key) const;
};

std::vector<ManifestEntry> read_manifest_entries(const std::filesystem::path& path);

/// Frames (PGM), ground-truth flow per interval (FLO1) and its meshflow
/// (MSH1), plus a copy of the scene config.
Manifest run_gen(const PipelineConfig& config);

/// One EVT1 stream per threshold with its voxel density.
Manifest run_simulate(const PipelineConfig& config);

struct SelectResult {
  Manifest manifest{"select"};
  Selection selection;
};

/// Contrast-based choice among the configured candidate streams. Without
/// a flow file the scene's ground-truth flow over `interval` is used.
SelectResult run_select(const PipelineConfig& config);

Manifest run_meshflow(const PipelineConfig& config, const std::filesystem::path& flow_file);

enum class EvalKind { kFlow, kMeshflow };

struct EvalResult {
  Manifest manifest{"eval"};
  std::vector<MetricRow> rows;
};

/// Meshflow inputs are upsampled to `size` (width, height), or to the
/// config scene's size when not given.
EvalResult run_eval(const PipelineConfig& config, const std::filesystem::path& pred, const std::filesystem::path& gt,
                    EvalKind kind, std::optional<std::pair<int, int>> size = std::nullopt);

struct WarpResult {
  Manifest manifest{"warp"};
  double error = 0.0;           // |ref - warped|
  double identity_error = 0.0;  // |ref - image|
};

/// Backward-warps `image` by a FLO1 flow or an MSH1 mesh (upsampled).
WarpResult run_warp(const PipelineConfig& config, const std::filesystem::path& image, const std::filesystem::path& ref,
                    const std::filesystem::path& motion);

enum class SubsampleMode { kSpatial, kTemporal };

Manifest run_subsample(const PipelineConfig& config, const std::filesystem::path& events,
                       const std::filesystem::path& flow, SubsampleMode mode, const SubsampleOptions& options);

/// Voxelizes each stream (VOX1) and tabulates density and occupancy.
Manifest run_density(const PipelineConfig& config, const std::vector<std::filesystem::path>& streams);

}  // namespace evmesh
