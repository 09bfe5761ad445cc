#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "evmesh/grid.hpp"

namespace evmesh {

/// Lowest intensity any rendered pixel may take; keeps log intensity finite.
inline constexpr double kIntensityFloor = 1e-3;

/// Slack allowed on the one-pixel displacement bound between consecutive
/// adaptive timestamps. Covers floating-point rounding of t_j - t_i only.
inline constexpr double kDisplacementSlack = 1e-9;

enum class MotionKind { kTranslation, kAffine, kHomographyPath };

std::string_view to_string(MotionKind kind);

/// Time-invariant parametric motion of the textured plane.
///
/// Translation moves every point with `velocity` (px/s). Affine and
/// homography-path motions are one-parameter groups: a point p at time t
/// maps to time t + dt through expm(G * dt) acting on the homogeneous
/// centered coordinate (p - c, 1), with c the image center. Affine motion
/// is the case where the last row of G is zero, i.e. the velocity field
/// is A (p - c) + b.
struct MotionSpec {
  MotionKind kind = MotionKind::kTranslation;
  Vec2d velocity{};
  std::array<double, 9> generator{};  // row-major 3x3

  static MotionSpec translation(double vx, double vy);
  static MotionSpec affine(const std::array<double, 4>& linear, Vec2d offset);
  static MotionSpec homography_path(const std::array<double, 9>& generator);
};

/// Point map between two instants: a projective transform of the
/// centered plane (affine and translation motions are special cases).
class PlaneMap {
 public:
  PlaneMap(const std::array<double, 9>& h, Vec2d center);

  /// Non-finite result when the point is sent to or past infinity.
  Vec2d apply(Vec2d p) const noexcept;

 private:
  std::array<double, 9> h_;
  Vec2d center_;
  bool pure_translation_;
};

class Scene {
 public:
  /// Throws ParameterError for sizes below 8 px or a non-positive duration.
  Scene(int width, int height, std::uint64_t texture_seed, MotionSpec motion, double duration = 1.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint64_t texture_seed() const noexcept { return seed_; }
  const MotionSpec& motion() const noexcept { return motion_; }
  double duration() const noexcept { return duration_; }
  const ImageF& texture() const noexcept { return *texture_; }

  /// Maps positions at time t_from to positions at time t_to.
  PlaneMap map(double t_from, double t_to) const;

  /// Position at time t_to of the scene point that sits at p at time t_from.
  Vec2d displace(Vec2d p, double t_from, double t_to) const { return map(t_from, t_to).apply(p); }

  /// Instantaneous image velocity (px/s) of the point currently at p.
  Vec2d velocity_at(Vec2d p) const;

  /// Throws RangeError unless t lies in [0, duration].
  void check_time(double t, std::string_view stage) const;

 private:
  int width_;
  int height_;
  std::uint64_t seed_;
  MotionSpec motion_;
  double duration_;
  Vec2d center_;
  std::shared_ptr<const ImageF> texture_;
};

/// Band-limited periodic pseudorandom texture in [0.1, 1], seed-determined.
ImageF make_texture(int width, int height, std::uint64_t seed);

IntensityFrame render_frame(const Scene& scene, double t);

/// F_{i->j}: displacement of every pixel of frame t_i to its position at t_j.
DenseFlow flow_between(const Scene& scene, double t_i, double t_j);

/// Largest per-pixel displacement between t_a and t_b, taken over both the
/// forward flow and the backward flow.
double max_displacement(const Scene& scene, double t_a, double t_b);

struct AdaptiveOptions {
  std::size_t max_steps = 1'000'000;
};

/// Sampling times tau_0 = t_i < ... < tau_N = t_j such that no pixel moves
/// more than one pixel between consecutive times. Each step starts from
/// the reciprocal of the peak pixel speed and shrinks until the bound holds.
std::vector<double> adaptive_timestamps(const Scene& scene, double t_i, double t_j,
                                        const AdaptiveOptions& options = {});

// Plain-text scene config: key = value lines, '#' comments.
//   width, height, seed, duration
//   motion = translation | affine | homography-path
//   velocity = vx vy                       (translation)
//   linear = a11 a12 a21 a22, offset = bx by (affine)
//   generator = g11 g12 ... g33            (homography-path)
Scene parse_scene_config(std::string_view text);
std::string format_scene_config(const Scene& scene);
Scene load_scene_config(const std::filesystem::path& path);

}  // namespace evmesh
