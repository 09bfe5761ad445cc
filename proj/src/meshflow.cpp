#include "evmesh/meshflow.hpp"

#include <algorithm>
#include <cmath>

#include "evmesh/error.hpp"
#include "evmesh/parallel.hpp"
#include "evmesh/sampling.hpp"
#include "evmesh/simd/kernels.hpp"

namespace evmesh {
namespace {

void check_spec(const MeshGridSpec& spec, const char* stage) {
  if (spec.cells_x < 1 || spec.cells_y < 1) throw ParameterError(stage, "mesh needs at least one cell per axis");
}

float median_of(std::vector<float>& values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const float upper = values[mid];
  if (n % 2 == 1) return upper;
  const float lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return static_cast<float>(0.5 * (static_cast<double>(lower) + static_cast<double>(upper)));
}

// Linear continuation of a 1D sequence past either end.
double extend_line(const std::vector<double>& line, int index) {
  const int n = static_cast<int>(line.size());
  if (index >= 0 && index < n) return line[static_cast<std::size_t>(index)];
  if (n == 1) return line[0];
  if (index < 0) return line[0] + index * (line[1] - line[0]);
  const double last = line[static_cast<std::size_t>(n - 1)];
  return last + (index - (n - 1)) * (last - line[static_cast<std::size_t>(n - 2)]);
}

}  // namespace

std::pair<int, int> cell_center_pixel(const MeshGridSpec& spec, int width, int height, int cx, int cy) {
  const double cw = static_cast<double>(width) / spec.cells_x;
  const double ch = static_cast<double>(height) / spec.cells_y;
  const double center_x = (cx + 0.5) * cw;
  const double center_y = (cy + 0.5) * ch;
  const int px = std::clamp(static_cast<int>(std::ceil(center_x - 0.5)), 0, width - 1);
  const int py = std::clamp(static_cast<int>(std::ceil(center_y - 0.5)), 0, height - 1);
  return {px, py};
}

VertexCandidates propagate(const DenseFlow& flow, const MeshGridSpec& spec, BorderMode border) {
  check_spec(spec, "propagate");
  if (flow.empty()) throw ShapeError("propagate", "flow is empty");
  if (flow.width < spec.cells_x || flow.height < spec.cells_y) {
    throw ShapeError("propagate", "flow is smaller than the mesh");
  }

  const int ncx = spec.cells_x;
  const int ncy = spec.cells_y;
  const int nvx = spec.vertices_x();
  const int nvy = spec.vertices_y();
  VertexCandidates out;
  out.spec = spec;
  out.lists.resize(spec.vertex_count());
  out.extrapolated.resize(spec.vertex_count());

  // Cell-center motion.
  std::vector<double> cu(static_cast<std::size_t>(ncx) * ncy);
  std::vector<double> cv(cu.size());
  for (int cy = 0; cy < ncy; ++cy) {
    for (int cx = 0; cx < ncx; ++cx) {
      const auto [px, py] = cell_center_pixel(spec, flow.width, flow.height, cx, cy);
      const Vec2f f = flow.at(px, py);
      cu[static_cast<std::size_t>(cy) * ncx + cx] = f.x;
      cv[static_cast<std::size_t>(cy) * ncx + cx] = f.y;
    }
  }

  const auto spread = [&](int cx, int cy, Vec2f value, std::vector<std::vector<Vec2f>>& target) {
    for (int vy = std::max(0, cy - 1); vy <= std::min(nvy - 1, cy + 2); ++vy) {
      for (int vx = std::max(0, cx - 1); vx <= std::min(nvx - 1, cx + 2); ++vx) {
        target[static_cast<std::size_t>(vy) * nvx + vx].push_back(value);
      }
    }
  };

  for (int cy = 0; cy < ncy; ++cy) {
    for (int cx = 0; cx < ncx; ++cx) {
      const auto i = static_cast<std::size_t>(cy) * ncx + cx;
      spread(cx, cy, {static_cast<float>(cu[i]), static_cast<float>(cv[i])}, out.lists);
    }
  }
  if (border == BorderMode::kClip) return out;

  // Cells up to two beyond each side still reach border vertices. Extend
  // rows first, then the columns of the row-extended grid.
  const int ext_w = ncx + 4;
  const int ext_h = ncy + 4;
  std::vector<double> eu(static_cast<std::size_t>(ext_w) * ext_h);
  std::vector<double> ev(eu.size());
  std::vector<double> line_u(static_cast<std::size_t>(ncx));
  std::vector<double> line_v(line_u.size());
  for (int cy = 0; cy < ncy; ++cy) {
    for (int cx = 0; cx < ncx; ++cx) {
      line_u[static_cast<std::size_t>(cx)] = cu[static_cast<std::size_t>(cy) * ncx + cx];
      line_v[static_cast<std::size_t>(cx)] = cv[static_cast<std::size_t>(cy) * ncx + cx];
    }
    for (int ex = 0; ex < ext_w; ++ex) {
      const auto k = static_cast<std::size_t>(cy + 2) * ext_w + ex;
      eu[k] = extend_line(line_u, ex - 2);
      ev[k] = extend_line(line_v, ex - 2);
    }
  }
  std::vector<double> col_u(static_cast<std::size_t>(ncy));
  std::vector<double> col_v(col_u.size());
  for (int ex = 0; ex < ext_w; ++ex) {
    for (int cy = 0; cy < ncy; ++cy) {
      col_u[static_cast<std::size_t>(cy)] = eu[static_cast<std::size_t>(cy + 2) * ext_w + ex];
      col_v[static_cast<std::size_t>(cy)] = ev[static_cast<std::size_t>(cy + 2) * ext_w + ex];
    }
    for (int ey = 0; ey < ext_h; ++ey) {
      const auto k = static_cast<std::size_t>(ey) * ext_w + ex;
      eu[k] = extend_line(col_u, ey - 2);
      ev[k] = extend_line(col_v, ey - 2);
    }
  }
  for (int ey = 0; ey < ext_h; ++ey) {
    for (int ex = 0; ex < ext_w; ++ex) {
      const int cx = ex - 2;
      const int cy = ey - 2;
      if (cx >= 0 && cx < ncx && cy >= 0 && cy < ncy) continue;
      const auto k = static_cast<std::size_t>(ey) * ext_w + ex;
      spread(cx, cy, {static_cast<float>(eu[k]), static_cast<float>(ev[k])}, out.extrapolated);
    }
  }
  return out;
}

MeshFlow f1_median(const VertexCandidates& candidates) {
  check_spec(candidates.spec, "f1_median");
  const auto& spec = candidates.spec;
  if (candidates.lists.size() != spec.vertex_count()) throw ShapeError("f1_median", "candidate table size mismatch");
  MeshFlow mesh(spec);
  std::vector<float> us;
  std::vector<float> vs;
  for (std::size_t k = 0; k < spec.vertex_count(); ++k) {
    us.clear();
    vs.clear();
    for (const Vec2f& c : candidates.lists[k]) {
      us.push_back(c.x);
      vs.push_back(c.y);
    }
    if (k < candidates.extrapolated.size()) {
      for (const Vec2f& c : candidates.extrapolated[k]) {
        us.push_back(c.x);
        vs.push_back(c.y);
      }
    }
    if (us.empty()) throw DataError("f1_median", "vertex " + std::to_string(k) + " has no candidates");
    mesh.u[k] = median_of(us);
    mesh.v[k] = median_of(vs);
  }
  return mesh;
}

MeshFlow f2_smooth(const MeshFlow& mesh, BorderMode border) {
  const auto& spec = mesh.spec;
  check_spec(spec, "f2_smooth");
  if (mesh.u.size() != spec.vertex_count() || mesh.v.size() != spec.vertex_count()) {
    throw ShapeError("f2_smooth", "mesh size does not match its spec");
  }
  const int nvx = spec.vertices_x();
  const int nvy = spec.vertices_y();
  MeshFlow out(spec);
  std::vector<float> us;
  std::vector<float> vs;
  for (int i = 0; i < nvy; ++i) {
    for (int j = 0; j < nvx; ++j) {
      int i0 = std::max(0, i - 1);
      int i1 = std::min(nvy - 1, i + 1);
      int j0 = std::max(0, j - 1);
      int j1 = std::min(nvx - 1, j + 1);
      if (border == BorderMode::kExtrapolate) {
        const int ri = std::min({1, i, nvy - 1 - i});
        const int rj = std::min({1, j, nvx - 1 - j});
        i0 = i - ri;
        i1 = i + ri;
        j0 = j - rj;
        j1 = j + rj;
      }
      us.clear();
      vs.clear();
      for (int a = i0; a <= i1; ++a) {
        for (int b = j0; b <= j1; ++b) {
          us.push_back(mesh.u[mesh.index(a, b)]);
          vs.push_back(mesh.v[mesh.index(a, b)]);
        }
      }
      out.set(i, j, {median_of(us), median_of(vs)});
    }
  }
  return out;
}

MeshFlow extract_meshflow(const DenseFlow& flow, const MeshGridSpec& spec, BorderMode border) {
  return f2_smooth(f1_median(propagate(flow, spec, border)), border);
}

DenseFlow upsample_bilinear(const MeshFlow& mesh, int height, int width) {
  const auto& spec = mesh.spec;
  check_spec(spec, "upsample_bilinear");
  if (height <= 0 || width <= 0) throw ShapeError("upsample_bilinear", "output size must be positive");
  if (mesh.u.size() != spec.vertex_count()) throw ShapeError("upsample_bilinear", "mesh size does not match its spec");
  DenseFlow out(width, height);
  for (int y = 0; y < height; ++y) {
    const double gy = static_cast<double>(y) * spec.cells_y / height;
    const int i = std::min(static_cast<int>(std::floor(gy)), spec.cells_y - 1);
    const double fy = gy - i;
    for (int x = 0; x < width; ++x) {
      const double gx = static_cast<double>(x) * spec.cells_x / width;
      const int j = std::min(static_cast<int>(std::floor(gx)), spec.cells_x - 1);
      const double fx = gx - j;
      const auto lerp2 = [&](const std::vector<float>& c) {
        const double v00 = c[mesh.index(i, j)];
        const double v01 = c[mesh.index(i, j + 1)];
        const double v10 = c[mesh.index(i + 1, j)];
        const double v11 = c[mesh.index(i + 1, j + 1)];
        const double top = v00 + fx * (v01 - v00);
        const double bottom = v10 + fx * (v11 - v10);
        return static_cast<float>(top + fy * (bottom - top));
      };
      out.set(x, y, {lerp2(mesh.u), lerp2(mesh.v)});
    }
  }
  return out;
}

MeshFlow naive_downsample(const DenseFlow& flow, const MeshGridSpec& spec) {
  check_spec(spec, "naive_downsample");
  if (flow.empty()) throw ShapeError("naive_downsample", "flow is empty");
  MeshFlow mesh(spec);
  for (int i = 0; i < spec.vertices_y(); ++i) {
    for (int j = 0; j < spec.vertices_x(); ++j) {
      const double x = static_cast<double>(j) * flow.width / spec.cells_x;
      const double y = static_cast<double>(i) * flow.height / spec.cells_y;
      mesh.set(i, j, {static_cast<float>(sample_bilinear_clamped(flow.u.data(), flow.width, flow.height, x, y)),
                      static_cast<float>(sample_bilinear_clamped(flow.v.data(), flow.width, flow.height, x, y))});
    }
  }
  return mesh;
}

IntensityFrame backward_warp(const IntensityFrame& image, const DenseFlow& flow) {
  if (image.width() != flow.width || image.height() != flow.height) {
    throw ShapeError("backward_warp", "flow and image sizes differ");
  }
  IntensityFrame out{ImageF(image.width(), image.height()), image.timestamp};
  const float* src = image.image.values.data();
  parallel_for(static_cast<std::size_t>(image.height()), [&](std::size_t y0, std::size_t y1) {
    for (auto y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        const Vec2f f = flow.at(x, y);
        out.image(x, y) = static_cast<float>(
            sample_bilinear_clamped(src, image.width(), image.height(), x + static_cast<double>(f.x),
                                    y + static_cast<double>(f.y)));
      }
    }
  });
  return out;
}

double alignment_error(const IntensityFrame& ref, const IntensityFrame& warped,
                       const std::optional<std::vector<unsigned char>>& mask) {
  if (!ref.image.same_shape(warped.image)) throw ShapeError("alignment_error", "image sizes differ");
  const std::size_t n = ref.image.size();
  if (n == 0) throw ShapeError("alignment_error", "images are empty");
  if (!mask) return simd::kernels().sum_abs_diff(ref.image.values.data(), warped.image.values.data(), n) / n;

  if (mask->size() != n) throw ShapeError("alignment_error", "mask size differs from the images");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if ((*mask)[i] == 0) continue;
    sum += std::fabs(static_cast<double>(ref.image.values[i]) - static_cast<double>(warped.image.values[i]));
    ++count;
  }
  if (count == 0) throw DataError("alignment_error", "mask selects no pixels");
  return sum / static_cast<double>(count);
}

}  // namespace evmesh
