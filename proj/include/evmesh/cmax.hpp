#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evmesh/events.hpp"
#include "evmesh/grid.hpp"

namespace evmesh {

struct WarpedEvents {
  std::vector<Vec2d> positions;
  std::vector<std::int8_t> polarities;
  std::vector<unsigned char> on_sensor;  // 1 if the warped position lies inside the sensor
  double t_ref = 0.0;                    // microseconds
  int width = 0;
  int height = 0;

  std::size_t size() const noexcept { return positions.size(); }
};

/// u' = u + (t_ref - t_e) / (t_j - t_i) * F(u), with F looked up at the
/// event's own integer pixel. Times in microseconds.
WarpedEvents warp_events(const EventStream& stream, const DenseFlow& flow, double t_ref, double t_i, double t_j);

enum class Splat { kBilinear, kNearest };

struct Iwe {
  ImageF image;
};

/// Image of warped events: unit mass per event, polarity ignored,
/// off-sensor mass dropped.
Iwe accumulate_iwe(const WarpedEvents& warped, int height, int width, Splat splat = Splat::kBilinear);

/// Mean squared deviation from the image mean over the whole sensor.
double contrast(const Iwe& iwe);

struct ContrastScore {
  double var_ti = 0.0;
  double var_tj = 0.0;
  double total() const noexcept { return var_ti + var_tj; }
};

/// Contrast of the IWE warped to t_i plus that of the IWE warped to t_j.
ContrastScore two_sided_score(const EventStream& stream, const DenseFlow& flow, double t_i, double t_j,
                              Splat splat = Splat::kBilinear);

struct Selection {
  std::size_t index = 0;
  std::vector<ContrastScore> scores;
};

/// Highest two-sided contrast wins; ties go to the lowest index.
Selection select_best(std::span<const EventStream> candidates, const DenseFlow& flow, double t_i, double t_j,
                      Splat splat = Splat::kBilinear);

/// CSV with header candidate_index,var_ti,var_tj,total.
std::string scores_csv(const Selection& selection);

}  // namespace evmesh
