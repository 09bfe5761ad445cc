#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace evmesh {

/// Bilinear sample of a row-major plane at continuous (x, y), clamping the
/// sample position to the plane so out-of-range reads replicate the edge.
/// Integer positions return the stored value exactly.
inline double sample_bilinear_clamped(const float* plane, int width, int height, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const auto at = [&](int xi, int yi) {
    return static_cast<double>(plane[static_cast<std::size_t>(yi) * static_cast<std::size_t>(width) + static_cast<std::size_t>(xi)]);
  };
  const double top = at(x0, y0) + fx * (at(x1, y0) - at(x0, y0));
  const double bottom = at(x0, y1) + fx * (at(x1, y1) - at(x0, y1));
  return top + fy * (bottom - top);
}

/// Bilinear sample on a torus of period (width, height).
inline double sample_bilinear_wrapped(const float* plane, int width, int height, double x, double y) {
  const double xf = std::floor(x);
  const double yf = std::floor(y);
  const double fx = x - xf;
  const double fy = y - yf;
  const auto wrap = [](long long i, int n) { return static_cast<int>(((i % n) + n) % n); };
  const int x0 = wrap(static_cast<long long>(xf), width);
  const int y0 = wrap(static_cast<long long>(yf), height);
  const int x1 = (x0 + 1) % width;
  const int y1 = (y0 + 1) % height;
  const auto at = [&](int xi, int yi) {
    return static_cast<double>(plane[static_cast<std::size_t>(yi) * static_cast<std::size_t>(width) + static_cast<std::size_t>(xi)]);
  };
  const double top = at(x0, y0) + fx * (at(x1, y0) - at(x0, y0));
  const double bottom = at(x0, y1) + fx * (at(x1, y1) - at(x0, y1));
  return top + fy * (bottom - top);
}

}  // namespace evmesh
