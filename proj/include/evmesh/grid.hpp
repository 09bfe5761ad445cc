#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace evmesh {

struct Vec2f {
  float x = 0.0F;
  float y = 0.0F;

  friend bool operator==(const Vec2f&, const Vec2f&) = default;
};

struct Vec2d {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2d&, const Vec2d&) = default;
};

/// Row-major 2D array. Coordinates follow image convention: x is the
/// column, y the row, pixel (x, y) sits at continuous position (x, y).
template <typename T>
struct Grid2 {
  int width = 0;
  int height = 0;
  std::vector<T> values;

  Grid2() = default;
  Grid2(int w, int h, T fill = T{})
      : width(w), height(h), values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  T& operator()(int x, int y) noexcept { return values[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return values[index(x, y)]; }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width && y < height; }

  template <typename U>
  bool same_shape(const Grid2<U>& other) const noexcept {
    return width == other.width && height == other.height;
  }
};

using ImageF = Grid2<float>;

/// A rendered frame I(u, tau). Values are linear intensities.
struct IntensityFrame {
  ImageF image;
  double timestamp = 0.0;  // seconds

  int width() const noexcept { return image.width; }
  int height() const noexcept { return image.height; }
};

/// Dense per-pixel displacement field in pixels, stored as separate u/v
/// planes so the component loops vectorize.
struct DenseFlow {
  int width = 0;
  int height = 0;
  std::vector<float> u;
  std::vector<float> v;

  DenseFlow() = default;
  DenseFlow(int w, int h, Vec2f fill = {})
      : width(w),
        height(h),
        u(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill.x),
        v(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill.y) {}

  std::size_t size() const noexcept { return u.size(); }
  bool empty() const noexcept { return u.empty(); }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  Vec2f at(int x, int y) const noexcept {
    const auto i = index(x, y);
    return {u[i], v[i]};
  }
  void set(int x, int y, Vec2f f) noexcept {
    const auto i = index(x, y);
    u[i] = f.x;
    v[i] = f.y;
  }
  bool same_shape(const DenseFlow& o) const noexcept { return width == o.width && height == o.height; }
  bool all_finite() const noexcept {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!std::isfinite(u[i]) || !std::isfinite(v[i])) return false;
    }
    return true;
  }
};

}  // namespace evmesh
