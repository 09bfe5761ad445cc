#include "evmesh/cmax.hpp"

#include <cmath>
#include <sstream>

#include "evmesh/config.hpp"
#include "evmesh/error.hpp"
#include "evmesh/simd/kernels.hpp"

namespace evmesh {

WarpedEvents warp_events(const EventStream& stream, const DenseFlow& flow, double t_ref, double t_i, double t_j) {
  if (t_i == t_j) throw ParameterError("warp_events", "t_i and t_j must differ");
  if (flow.width != stream.width || flow.height != stream.height) {
    throw ShapeError("warp_events", "flow does not match the sensor");
  }
  WarpedEvents out;
  out.t_ref = t_ref;
  out.width = stream.width;
  out.height = stream.height;
  out.positions.reserve(stream.size());
  out.polarities.reserve(stream.size());
  out.on_sensor.reserve(stream.size());
  const double span = t_j - t_i;
  for (const Event& e : stream.events) {
    const Vec2f f = flow.at(e.x, e.y);
    const double s = (t_ref - static_cast<double>(e.t)) / span;
    const Vec2d p{e.x + s * f.x, e.y + s * f.y};
    out.positions.push_back(p);
    out.polarities.push_back(e.p);
    const bool inside = p.x >= 0.0 && p.y >= 0.0 && p.x <= stream.width - 1 && p.y <= stream.height - 1;
    out.on_sensor.push_back(inside ? 1 : 0);
  }
  return out;
}

Iwe accumulate_iwe(const WarpedEvents& warped, int height, int width, Splat splat) {
  if (height <= 0 || width <= 0) throw ShapeError("accumulate_iwe", "image size must be positive");
  Iwe iwe{ImageF(width, height)};
  auto& img = iwe.image;
  const auto deposit = [&](int x, int y, double w) {
    if (w > 0.0 && img.contains(x, y)) img(x, y) += static_cast<float>(w);
  };
  for (const Vec2d& p : warped.positions) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    if (splat == Splat::kNearest) {
      deposit(static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)), 1.0);
      continue;
    }
    const double fx = std::floor(p.x);
    const double fy = std::floor(p.y);
    if (fx < -1.0 || fy < -1.0 || fx > width || fy > height) continue;
    const auto x0 = static_cast<int>(fx);
    const auto y0 = static_cast<int>(fy);
    const double ax = p.x - fx;
    const double ay = p.y - fy;
    deposit(x0, y0, (1.0 - ax) * (1.0 - ay));
    deposit(x0 + 1, y0, ax * (1.0 - ay));
    deposit(x0, y0 + 1, (1.0 - ax) * ay);
    deposit(x0 + 1, y0 + 1, ax * ay);
  }
  return iwe;
}

double contrast(const Iwe& iwe) {
  const auto& img = iwe.image;
  if (img.empty()) return 0.0;
  const auto& k = simd::kernels();
  const double n = static_cast<double>(img.size());
  const double mean = k.sum(img.values.data(), img.size()) / n;
  return k.sum_sq_dev(img.values.data(), img.size(), mean) / n;
}

ContrastScore two_sided_score(const EventStream& stream, const DenseFlow& flow, double t_i, double t_j, Splat splat) {
  if (!(t_i < t_j)) throw ParameterError("two_sided_score", "requires t_i < t_j");
  if (stream.empty()) return {};
  ContrastScore score;
  score.var_ti = contrast(accumulate_iwe(warp_events(stream, flow, t_i, t_i, t_j), stream.height, stream.width, splat));
  score.var_tj = contrast(accumulate_iwe(warp_events(stream, flow, t_j, t_i, t_j), stream.height, stream.width, splat));
  return score;
}

Selection select_best(std::span<const EventStream> candidates, const DenseFlow& flow, double t_i, double t_j,
                      Splat splat) {
  if (candidates.empty()) throw ParameterError("select_best", "no candidate streams");
  Selection sel;
  sel.scores.reserve(candidates.size());
  for (const auto& c : candidates) sel.scores.push_back(two_sided_score(c, flow, t_i, t_j, splat));
  for (std::size_t i = 1; i < sel.scores.size(); ++i) {
    if (sel.scores[i].total() > sel.scores[sel.index].total()) sel.index = i;
  }
  return sel;
}

std::string scores_csv(const Selection& selection) {
  std::ostringstream out;
  out << "candidate_index,var_ti,var_tj,total\n";
  for (std::size_t i = 0; i < selection.scores.size(); ++i) {
    const auto& s = selection.scores[i];
    out << i << "," << format_double(s.var_ti) << "," << format_double(s.var_tj) << "," << format_double(s.total())
        << "\n";
  }
  return out.str();
}

}  // namespace evmesh
