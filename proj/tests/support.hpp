#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "evmesh/events.hpp"
#include "evmesh/grid.hpp"
#include "evmesh/rng.hpp"

namespace testing_support {

inline float uniform(std::mt19937_64& rng, double lo, double hi) {
  return static_cast<float>(lo + (hi - lo) * evmesh::uniform01(rng));
}

inline std::vector<float> random_values(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<float> v(n);
  for (float& x : v) x = uniform(rng, lo, hi);
  return v;
}

inline evmesh::DenseFlow random_flow(std::mt19937_64& rng, int w, int h, double amp = 3.0) {
  evmesh::DenseFlow f(w, h);
  f.u = random_values(rng, f.size(), -amp, amp);
  f.v = random_values(rng, f.size(), -amp, amp);
  return f;
}

/// Random positive frames with strictly increasing random timestamps.
inline evmesh::FrameSequence random_frames(std::mt19937_64& rng, int w, int h, int n) {
  evmesh::FrameSequence seq;
  double t = 0.0;
  for (int k = 0; k < n; ++k) {
    evmesh::IntensityFrame f{evmesh::ImageF(w, h), t};
    for (float& v : f.image.values) v = uniform(rng, 0.05, 1.0);
    seq.frames.push_back(std::move(f));
    t += 0.001 + 0.01 * evmesh::uniform01(rng);
  }
  return seq;
}

/// Time-ordered random stream over [t0, t1] microseconds.
inline evmesh::EventStream random_stream(std::mt19937_64& rng, int w, int h, std::size_t n, std::int64_t t0 = 0,
                                         std::int64_t t1 = 100000) {
  evmesh::EventStream s;
  s.width = w;
  s.height = h;
  s.t_start = t0;
  s.t_end = t1;
  for (std::size_t i = 0; i < n; ++i) {
    evmesh::Event e;
    e.x = static_cast<std::uint16_t>(rng() % static_cast<unsigned>(w));
    e.y = static_cast<std::uint16_t>(rng() % static_cast<unsigned>(h));
    e.t = t0 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(t1 - t0 + 1));
    e.p = (rng() & 1U) != 0 ? 1 : -1;
    s.events.push_back(e);
  }
  std::sort(s.events.begin(), s.events.end(), evmesh::event_less);
  return s;
}

}  // namespace testing_support
