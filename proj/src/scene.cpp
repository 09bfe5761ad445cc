#include "evmesh/scene.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "evmesh/config.hpp"
#include "evmesh/error.hpp"
#include "evmesh/parallel.hpp"
#include "evmesh/rng.hpp"
#include "evmesh/sampling.hpp"

namespace evmesh {
namespace {

using Mat3 = std::array<double, 9>;

Mat3 identity3() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 3; ++k) {
      const double ark = a[r * 3 + k];
      if (ark == 0.0) continue;
      for (int col = 0; col < 3; ++col) c[r * 3 + col] += ark * b[k * 3 + col];
    }
  }
  return c;
}

// Matrix exponential by scaling and squaring with a truncated Taylor
// series. Norms here are small (velocity generators times seconds), so
// 20 terms after scaling to norm <= 0.5 are accurate to machine precision.
// Zero rows of m stay exactly zero in the result's deviation from identity.
Mat3 expm(const Mat3& m) {
  double norm = 0.0;
  for (int r = 0; r < 3; ++r) {
    norm = std::max(norm, std::fabs(m[r * 3]) + std::fabs(m[r * 3 + 1]) + std::fabs(m[r * 3 + 2]));
  }
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const double s = std::ldexp(1.0, -squarings);
  Mat3 a{};
  for (int i = 0; i < 9; ++i) a[i] = m[i] * s;

  Mat3 result = identity3();
  Mat3 term = identity3();
  for (int k = 1; k <= 20; ++k) {
    term = mul(term, a);
    for (double& t : term) t /= k;
    for (int i = 0; i < 9; ++i) result[i] += term[i];
  }
  for (int i = 0; i < squarings; ++i) result = mul(result, result);
  return result;
}

double value_noise_octave(const std::vector<double>& lattice, int nx, int ny, double u, double v) {
  // u, v in lattice units on a torus of nx by ny nodes; cosine-smoothed.
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const int x0 = static_cast<int>(fu) % nx;
  const int y0 = static_cast<int>(fv) % ny;
  const int x1 = (x0 + 1) % nx;
  const int y1 = (y0 + 1) % ny;
  const double tx = 0.5 - 0.5 * std::cos(M_PI * (u - fu));
  const double ty = 0.5 - 0.5 * std::cos(M_PI * (v - fv));
  const auto at = [&](int x, int y) { return lattice[static_cast<std::size_t>(y * nx + x)]; };
  const double top = at(x0, y0) + tx * (at(x1, y0) - at(x0, y0));
  const double bottom = at(x0, y1) + tx * (at(x1, y1) - at(x0, y1));
  return top + ty * (bottom - top);
}

}  // namespace

std::string_view to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::kTranslation: return "translation";
    case MotionKind::kAffine: return "affine";
    case MotionKind::kHomographyPath: return "homography-path";
  }
  return "unknown";
}

MotionSpec MotionSpec::translation(double vx, double vy) {
  MotionSpec m;
  m.kind = MotionKind::kTranslation;
  m.velocity = {vx, vy};
  m.generator = {0, 0, vx, 0, 0, vy, 0, 0, 0};
  return m;
}

MotionSpec MotionSpec::affine(const std::array<double, 4>& linear, Vec2d offset) {
  MotionSpec m;
  m.kind = MotionKind::kAffine;
  m.generator = {linear[0], linear[1], offset.x, linear[2], linear[3], offset.y, 0, 0, 0};
  return m;
}

MotionSpec MotionSpec::homography_path(const std::array<double, 9>& generator) {
  MotionSpec m;
  m.kind = MotionKind::kHomographyPath;
  m.generator = generator;
  return m;
}

ImageF make_texture(int width, int height, std::uint64_t seed) {
  // Octave periods in pixels, coarse to fine, amplitude halving per octave.
  constexpr std::array<double, 5> kPeriods{32.0, 16.0, 8.0, 4.0, 2.5};
  std::vector<double> acc(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0);
  double amplitude = 1.0;
  for (std::size_t k = 0; k < kPeriods.size(); ++k) {
    const int nx = std::max(2, static_cast<int>(std::lround(width / kPeriods[k])));
    const int ny = std::max(2, static_cast<int>(std::lround(height / kPeriods[k])));
    auto rng = make_rng(seed, k);
    std::vector<double> lattice(static_cast<std::size_t>(nx * ny));
    for (double& node : lattice) node = 2.0 * uniform01(rng) - 1.0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double u = static_cast<double>(x) * nx / width;
        const double v = static_cast<double>(y) * ny / height;
        acc[static_cast<std::size_t>(y) * width + x] += amplitude * value_noise_octave(lattice, nx, ny, u, v);
      }
    }
    amplitude *= 0.6;
  }
  const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
  const double range = std::max(*hi - *lo, 1e-12);
  ImageF tex(width, height);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    tex.values[i] = static_cast<float>(0.1 + 0.9 * (acc[i] - *lo) / range);
  }
  return tex;
}

Scene::Scene(int width, int height, std::uint64_t texture_seed, MotionSpec motion, double duration)
    : width_(width), height_(height), seed_(texture_seed), motion_(motion), duration_(duration) {
  if (width < 8 || height < 8) throw ParameterError("scene", "width and height must be at least 8 px");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ParameterError("scene", "duration must be positive");
  for (double g : motion_.generator) {
    if (!std::isfinite(g)) throw ParameterError("scene", "motion coefficients must be finite");
  }
  center_ = {0.5 * width, 0.5 * height};
  texture_ = std::make_shared<const ImageF>(make_texture(width, height, texture_seed));
}

void Scene::check_time(double t, std::string_view stage) const {
  if (!(t >= 0.0 && t <= duration_)) {
    throw RangeError(std::string(stage), "time " + format_double(t) + " s outside [0, " + format_double(duration_) + "]");
  }
}

PlaneMap Scene::map(double t_from, double t_to) const {
  const double dt = t_to - t_from;
  if (motion_.kind == MotionKind::kTranslation) {
    return PlaneMap({1, 0, motion_.velocity.x * dt, 0, 1, motion_.velocity.y * dt, 0, 0, 1}, center_);
  }
  Mat3 g = motion_.generator;
  for (double& v : g) v *= dt;
  return PlaneMap(expm(g), center_);
}

PlaneMap::PlaneMap(const std::array<double, 9>& h, Vec2d center)
    : h_(h),
      center_(center),
      pure_translation_(h[0] == 1.0 && h[1] == 0.0 && h[3] == 0.0 && h[4] == 1.0 && h[6] == 0.0 && h[7] == 0.0 &&
                        h[8] == 1.0) {}

Vec2d PlaneMap::apply(Vec2d p) const noexcept {
  if (pure_translation_) return {p.x + h_[2], p.y + h_[5]};
  const double qx = p.x - center_.x;
  const double qy = p.y - center_.y;
  const double wx = h_[0] * qx + h_[1] * qy + h_[2];
  const double wy = h_[3] * qx + h_[4] * qy + h_[5];
  const double wz = h_[6] * qx + h_[7] * qy + h_[8];
  if (!(wz > 0.0)) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf};
  }
  if (wz == 1.0) return {center_.x + wx, center_.y + wy};
  return {center_.x + wx / wz, center_.y + wy / wz};
}

Vec2d Scene::velocity_at(Vec2d p) const {
  if (motion_.kind == MotionKind::kTranslation) return motion_.velocity;
  const auto& g = motion_.generator;
  const double qx = p.x - center_.x;
  const double qy = p.y - center_.y;
  const double wx = g[0] * qx + g[1] * qy + g[2];
  const double wy = g[3] * qx + g[4] * qy + g[5];
  const double wz = g[6] * qx + g[7] * qy + g[8];
  return {wx - qx * wz, wy - qy * wz};
}

IntensityFrame render_frame(const Scene& scene, double t) {
  scene.check_time(t, "render_frame");
  IntensityFrame frame{ImageF(scene.width(), scene.height()), t};
  const ImageF& tex = scene.texture();
  const PlaneMap to_texture = scene.map(t, 0.0);
  std::atomic<bool> degenerate{false};
  parallel_for(static_cast<std::size_t>(scene.height()), [&](std::size_t y0, std::size_t y1) {
    for (auto y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < scene.width(); ++x) {
        const Vec2d src = to_texture.apply({static_cast<double>(x), static_cast<double>(y)});
        if (!std::isfinite(src.x) || !std::isfinite(src.y)) {
          degenerate = true;
          continue;
        }
        const double value = sample_bilinear_wrapped(tex.values.data(), tex.width, tex.height, src.x, src.y);
        frame.image(x, y) = static_cast<float>(std::max(value, kIntensityFloor));
      }
    }
  });
  if (degenerate) throw DataError("render_frame", "motion maps a pixel to infinity");
  return frame;
}

DenseFlow flow_between(const Scene& scene, double t_i, double t_j) {
  scene.check_time(t_i, "flow_between");
  scene.check_time(t_j, "flow_between");
  DenseFlow flow(scene.width(), scene.height());
  const PlaneMap forward = scene.map(t_i, t_j);
  parallel_for(static_cast<std::size_t>(scene.height()), [&](std::size_t y0, std::size_t y1) {
    for (auto y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < scene.width(); ++x) {
        const Vec2d p{static_cast<double>(x), static_cast<double>(y)};
        const Vec2d q = forward.apply(p);
        flow.set(x, y, {static_cast<float>(q.x - p.x), static_cast<float>(q.y - p.y)});
      }
    }
  });
  return flow;
}

double max_displacement(const Scene& scene, double t_a, double t_b) {
  const PlaneMap forward = scene.map(t_a, t_b);
  const PlaneMap backward = scene.map(t_b, t_a);
  double worst = 0.0;
  for (int y = 0; y < scene.height(); ++y) {
    for (int x = 0; x < scene.width(); ++x) {
      const Vec2d p{static_cast<double>(x), static_cast<double>(y)};
      const Vec2d fwd = forward.apply(p);
      const Vec2d bwd = backward.apply(p);
      const double df = std::hypot(fwd.x - p.x, fwd.y - p.y);
      const double db = std::hypot(bwd.x - p.x, bwd.y - p.y);
      if (!std::isfinite(df) || !std::isfinite(db)) return std::numeric_limits<double>::infinity();
      worst = std::max({worst, df, db});
    }
  }
  return worst;
}

std::vector<double> adaptive_timestamps(const Scene& scene, double t_i, double t_j, const AdaptiveOptions& options) {
  if (!(t_i < t_j)) throw ParameterError("adaptive_timestamps", "requires t_i < t_j");
  scene.check_time(t_i, "adaptive_timestamps");
  scene.check_time(t_j, "adaptive_timestamps");

  double peak_speed = 0.0;
  for (int y = 0; y < scene.height(); ++y) {
    for (int x = 0; x < scene.width(); ++x) {
      const Vec2d v = scene.velocity_at({static_cast<double>(x), static_cast<double>(y)});
      peak_speed = std::max(peak_speed, std::hypot(v.x, v.y));
    }
  }
  if (!std::isfinite(peak_speed)) throw RangeError("adaptive_timestamps", "unbounded pixel speed");

  const double span = t_j - t_i;
  const double snap = 1e-12 * span;
  std::vector<double> times{t_i};
  double tau = t_i;
  while (tau < t_j) {
    if (times.size() > options.max_steps) {
      throw RangeError("adaptive_timestamps", "step-count cap exceeded (" + std::to_string(options.max_steps) + ")");
    }
    double next = t_j;
    if (peak_speed > 0.0) {
      double step = 1.0 / peak_speed;
      // The velocity bound is instantaneous; along curved or accelerating
      // trajectories the realised displacement can exceed it.
      for (int attempt = 0; attempt < 200; ++attempt) {
        const double candidate = tau + step >= t_j - snap ? t_j : tau + step;
        const double d = max_displacement(scene, tau, candidate);
        if (d <= 1.0 + kDisplacementSlack) {
          next = candidate;
          break;
        }
        step *= std::isfinite(d) ? std::min(0.999 / d, 0.999) : 0.5;
        next = tau;
      }
      if (next <= tau) throw RangeError("adaptive_timestamps", "step-count cap exceeded: no admissible step");
    }
    times.push_back(next);
    tau = next;
  }
  return times;
}

Scene parse_scene_config(std::string_view text) {
  const auto kv = KeyValues::parse(text, "scene_config");
  const auto width = static_cast<int>(kv.integer("width"));
  const auto height = static_cast<int>(kv.integer("height"));
  const auto seed = static_cast<std::uint64_t>(kv.integer_or("seed", 0));
  const double duration = kv.number_or("duration", 1.0);
  const std::string kind = kv.get("motion").value_or("translation");

  const auto expect = [&](const std::string& key, std::size_t n) {
    auto values = kv.has(key) ? kv.numbers(key) : std::vector<double>(n, 0.0);
    if (values.size() != n) {
      throw ParseError("scene_config", key + " needs " + std::to_string(n) + " numbers");
    }
    return values;
  };

  MotionSpec motion;
  if (kind == "translation") {
    const auto v = expect("velocity", 2);
    motion = MotionSpec::translation(v[0], v[1]);
  } else if (kind == "affine") {
    const auto a = expect("linear", 4);
    const auto b = expect("offset", 2);
    motion = MotionSpec::affine({a[0], a[1], a[2], a[3]}, {b[0], b[1]});
  } else if (kind == "homography-path") {
    const auto g = expect("generator", 9);
    std::array<double, 9> gen{};
    std::copy(g.begin(), g.end(), gen.begin());
    motion = MotionSpec::homography_path(gen);
  } else {
    throw ParseError("scene_config", "unknown motion kind '" + kind + "'");
  }
  return Scene(width, height, seed, motion, duration);
}

std::string format_scene_config(const Scene& scene) {
  std::ostringstream out;
  out << "width = " << scene.width() << "\n";
  out << "height = " << scene.height() << "\n";
  out << "seed = " << scene.texture_seed() << "\n";
  out << "duration = " << format_double(scene.duration()) << "\n";
  const auto& m = scene.motion();
  out << "motion = " << to_string(m.kind) << "\n";
  const auto& g = m.generator;
  switch (m.kind) {
    case MotionKind::kTranslation:
      out << "velocity = " << format_double(m.velocity.x) << " " << format_double(m.velocity.y) << "\n";
      break;
    case MotionKind::kAffine:
      out << "linear = " << format_double(g[0]) << " " << format_double(g[1]) << " " << format_double(g[3]) << " "
          << format_double(g[4]) << "\n";
      out << "offset = " << format_double(g[2]) << " " << format_double(g[5]) << "\n";
      break;
    case MotionKind::kHomographyPath:
      out << "generator =";
      for (double v : g) out << " " << format_double(v);
      out << "\n";
      break;
  }
  return out.str();
}

Scene load_scene_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("scene_config", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene_config(buf.str());
}

}  // namespace evmesh
