#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "evmesh/grid.hpp"

namespace evmesh {

struct MeshGridSpec {
  int cells_x = 16;
  int cells_y = 16;

  int vertices_x() const noexcept { return cells_x + 1; }
  int vertices_y() const noexcept { return cells_y + 1; }
  std::size_t vertex_count() const noexcept { return static_cast<std::size_t>(vertices_x()) * vertices_y(); }
  friend bool operator==(const MeshGridSpec&, const MeshGridSpec&) = default;
};

/// Motion at mesh vertices, row-major over (cells_y + 1) x (cells_x + 1).
/// Vertex (i, j) sits at continuous pixel position (j * W / cells_x,
/// i * H / cells_y).
struct MeshFlow {
  MeshGridSpec spec;
  std::vector<float> u;
  std::vector<float> v;

  MeshFlow() = default;
  explicit MeshFlow(MeshGridSpec s, Vec2f fill = {})
      : spec(s), u(s.vertex_count(), fill.x), v(s.vertex_count(), fill.y) {}

  std::size_t index(int i, int j) const noexcept { return static_cast<std::size_t>(i) * spec.vertices_x() + j; }
  Vec2f at(int i, int j) const noexcept { return {u[index(i, j)], v[index(i, j)]}; }
  void set(int i, int j, Vec2f f) noexcept {
    u[index(i, j)] = f.x;
    v[index(i, j)] = f.y;
  }
};

/// How vertices near the image border are treated.
///  kExtrapolate: cells beyond the image are synthesized by linear
///    extrapolation of the cell-center flow and contribute candidates; f2
///    shrinks its window symmetrically at the border. Affine fields are
///    reproduced exactly everywhere.
///  kClip: only real cells contribute; f2 uses whatever in-grid neighbors
///    exist. Border vertices then see one-sided neighborhoods.
enum class BorderMode { kExtrapolate, kClip };

struct VertexCandidates {
  MeshGridSpec spec;
  std::vector<std::vector<Vec2f>> lists;       // from cells inside the image
  std::vector<std::vector<Vec2f>> extrapolated;  // from synthesized outside cells

  const std::vector<Vec2f>& at(int i, int j) const { return lists[static_cast<std::size_t>(i) * spec.vertices_x() + j]; }
};

/// Pixel taken as the center of cell (cx, cy): the nearest pixel to the
/// real-valued center, ties toward the lower index.
std::pair<int, int> cell_center_pixel(const MeshGridSpec& spec, int width, int height, int cx, int cy);

/// Motion propagation: each cell's center flow is appended to every vertex
/// on or inside the 3x3-cell rectangle centered at that cell.
VertexCandidates propagate(const DenseFlow& flow, const MeshGridSpec& spec,
                           BorderMode border = BorderMode::kExtrapolate);

/// Componentwise median over each vertex's candidates (real and
/// extrapolated); even counts average the two middle values.
MeshFlow f1_median(const VertexCandidates& candidates);

/// Componentwise median over each vertex's 3x3 vertex neighborhood.
MeshFlow f2_smooth(const MeshFlow& mesh, BorderMode border = BorderMode::kExtrapolate);

MeshFlow extract_meshflow(const DenseFlow& flow, const MeshGridSpec& spec = {},
                          BorderMode border = BorderMode::kExtrapolate);

DenseFlow upsample_bilinear(const MeshFlow& mesh, int height, int width);

/// Baseline: sample the dense flow bilinearly at the vertex positions.
MeshFlow naive_downsample(const DenseFlow& flow, const MeshGridSpec& spec);

/// out(u) = image(u + flow(u)), bilinear, clamped to the edge.
IntensityFrame backward_warp(const IntensityFrame& image, const DenseFlow& flow);

/// Mean absolute intensity difference, optionally over a pixel mask.
double alignment_error(const IntensityFrame& ref, const IntensityFrame& warped,
                       const std::optional<std::vector<unsigned char>>& mask = std::nullopt);

}  // namespace evmesh
