#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "evmesh/error.hpp"
#include "evmesh/events.hpp"
#include "evmesh/parallel.hpp"
#include "evmesh/representation.hpp"
#include "evmesh/scene.hpp"
#include "oracles/event_oracle.hpp"
#include "support.hpp"

using namespace evmesh;

namespace {

FrameSequence two_frames(float i0, float i1) {
  FrameSequence seq;
  seq.frames.push_back({ImageF(1, 1, i0), 0.0});
  seq.frames.push_back({ImageF(1, 1, i1), 1.0});
  return seq;
}

bool is_subsequence(const EventStream& sub, const EventStream& full) {
  std::size_t j = 0;
  for (const Event& e : sub.events) {
    while (j < full.events.size() && !(full.events[j] == e)) ++j;
    if (j == full.events.size()) return false;
    ++j;
  }
  return true;
}

}  // namespace

TEST_CASE("simulate on hand-built steps") {
  SUBCASE("constant frames emit nothing") {
    FrameSequence seq;
    for (int k = 0; k < 4; ++k) seq.frames.push_back({ImageF(3, 3, 0.4F), 0.1 * k});
    CHECK(simulate(seq, 0.1).empty());
  }
  SUBCASE("a rise of 2.5 C emits two events at 40% and 80%") {
    const float i1 = std::exp(0.5F);
    const double c = (std::log(static_cast<double>(i1)) - std::log(1.0)) / 2.5;
    const auto s = simulate(two_frames(1.0F, i1), c);
    REQUIRE(s.size() == 2);
    CHECK(s.events[0].p == 1);
    CHECK(s.events[1].p == 1);
    CHECK(s.events[0].t == 400000);
    CHECK(s.events[1].t == 800000);
  }
  SUBCASE("a drop of exactly C emits one negative event") {
    const float i1 = std::exp(-0.3F);
    const double c = -std::log(static_cast<double>(i1));
    const auto s = simulate(two_frames(1.0F, i1), c);
    REQUIRE(s.size() == 1);
    CHECK(s.events[0].p == -1);
    CHECK(s.events[0].t == 1000000);
  }
  SUBCASE("sub-threshold residue carries across frames") {
    FrameSequence seq;
    const double c = 0.2;
    for (int k = 0; k < 4; ++k) seq.frames.push_back({ImageF(1, 1, static_cast<float>(std::exp(0.09 * k))), 1.0 * k});
    // 0.09 per frame: crossings at 0.2 (frame 2..3) only
    const auto s = simulate(seq, c);
    REQUIRE(s.size() == 1);
    CHECK(s.events[0].p == 1);
    CHECK(s.events[0].t > 2000000);
  }
  SUBCASE("errors") {
    const auto seq = two_frames(0.5F, 0.6F);
    CHECK_THROWS_AS(simulate(seq, 0.0), ParameterError);
    CHECK_THROWS_AS(simulate(seq, -1.0), ParameterError);
    FrameSequence one;
    one.frames.push_back({ImageF(2, 2, 0.5F), 0.0});
    CHECK_THROWS_AS(simulate(one, 0.1), ShapeError);
    FrameSequence mixed = seq;
    mixed.frames[1].image = ImageF(2, 1, 0.5F);
    CHECK_THROWS_AS(simulate(mixed, 0.1), ShapeError);
    FrameSequence back = seq;
    back.frames[1].timestamp = 0.0;
    CHECK_THROWS_AS(simulate(back, 0.1), DataError);
  }
}

TEST_CASE("simulate agrees with the per-pixel oracle") {
  auto rng = make_rng(2024, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const auto seq = testing_support::random_frames(rng, 5, 3, 12);
    const double c = 0.05 + 0.4 * uniform01(rng);
    const auto s = simulate(seq, c);
    validate_stream(s);
    std::map<std::pair<int, int>, std::vector<Event>> got;
    for (const Event& e : s.events) got[{e.y, e.x}].push_back(e);
    for (int y = 0; y < 3; ++y) {
      for (int x = 0; x < 5; ++x) {
        std::vector<double> trace;
        std::vector<double> times;
        for (const auto& f : seq.frames) {
          trace.push_back(std::log(static_cast<double>(f.image(x, y))));
          times.push_back(f.timestamp);
        }
        const auto want = oracle::pixel_events(trace, times, c);
        const auto& have = got[{y, x}];
        REQUIRE(have.size() == want.size());
        // a pixel's own events come out in emission order
        for (std::size_t k = 0; k < want.size(); ++k) {
          CHECK(have[k].p == want[k].polarity);
          CHECK(std::fabs(static_cast<double>(have[k].t) - want[k].t_us) <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("simulate properties") {
  const Scene scene(40, 32, 5, MotionSpec::translation(12.0, -5.0));
  const auto seq = render_sequence(scene, adaptive_timestamps(scene, 0.0, 1.0));
  SUBCASE("output is sorted by time then row, column, polarity") {
    const auto s = simulate(seq, 0.15);
    REQUIRE(!s.empty());
    CHECK(std::is_sorted(s.events.begin(), s.events.end(), event_less));
    validate_stream(s);
  }
  SUBCASE("bit-identical across runs and thread counts") {
    set_thread_count(1);
    const auto a = simulate(seq, 0.15);
    set_thread_count(3);
    const auto b = simulate(seq, 0.15);
    set_thread_count(0);
    CHECK(a.events == b.events);
  }
  SUBCASE("a brightening pixel emits only positive events") {
    FrameSequence up;
    for (int k = 0; k < 6; ++k) up.frames.push_back({ImageF(2, 2, 0.1F + 0.15F * k), 0.01 * k});
    const auto s = simulate(up, 0.1);
    REQUIRE(!s.empty());
    for (const Event& e : s.events) CHECK(e.p == 1);
  }
  SUBCASE("multi-density sweep") {
    const std::vector<double> cs{0.1, 0.2, 0.4};
    const auto streams = multi_density_sweep(seq, cs);
    REQUIRE(streams.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(streams[k].events == simulate(seq, cs[k]).events);
    CHECK(density(voxelize(streams[0])) >= density(voxelize(streams[1])));
    CHECK(density(voxelize(streams[1])) >= density(voxelize(streams[2])));
    const std::vector<double> huge{50.0};
    CHECK(multi_density_sweep(seq, huge)[0].empty());
    CHECK_THROWS_AS(multi_density_sweep(seq, std::vector<double>{}), ParameterError);
    CHECK_THROWS_AS(multi_density_sweep(seq, std::vector<double>{0.1, -0.1}), ParameterError);
  }
}

TEST_CASE("validate_stream") {
  EventStream s{4, 4, 0, 10, {{1, 1, 5, 1}}};
  CHECK_NOTHROW(validate_stream(s));
  s.events[0].x = 4;
  CHECK_THROWS_AS(validate_stream(s), DataError);
  s.events[0] = {1, 1, 11, 1};
  CHECK_THROWS_AS(validate_stream(s), DataError);
  s.events[0] = {1, 1, 5, 0};
  CHECK_THROWS_AS(validate_stream(s), DataError);
  s.events = {{1, 1, 5, 1}, {1, 1, 4, 1}};
  CHECK_THROWS_AS(validate_stream(s), DataError);
}

TEST_CASE("spatial_guided_subsample") {
  auto rng = make_rng(8, 2);
  const auto stream = testing_support::random_stream(rng, 16, 12, 800);
  const DenseFlow zero(16, 12);
  SUBCASE("keep ratio 1 returns the input") {
    CHECK(spatial_guided_subsample(stream, testing_support::random_flow(rng, 16, 12), {1.0, 0.5}).events ==
          stream.events);
  }
  SUBCASE("zero flow keeps exactly the events on the seed lattice") {
    CHECK(seed_spacing(0.25) == 2);
    const auto out = spatial_guided_subsample(stream, zero, {0.25, 0.5});
    std::vector<Event> want;
    for (const Event& e : stream.events) {
      if (e.x % 2 == 0 && e.y % 2 == 0) want.push_back(e);
    }
    CHECK(out.events == want);
  }
  SUBCASE("moving flow keeps events near seed trajectories") {
    DenseFlow f(16, 12, {4.0F, 0.0F});
    const auto out = spatial_guided_subsample(stream, f, {0.25, 0.5});
    CHECK(is_subsequence(out, stream));
    for (const Event& e : out.events) {
      const double s = static_cast<double>(e.t - stream.t_start) / static_cast<double>(stream.t_end - stream.t_start);
      bool near = false;
      for (int sy = 0; sy < 12; sy += 2) {
        for (int sx = 0; sx < 16; sx += 2) near = near || std::hypot(sx + 4.0 * s - e.x, double(sy - e.y)) <= 0.5;
      }
      CHECK(near);
    }
    CHECK(out.size() < stream.size());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(spatial_guided_subsample(stream, zero, {0.0, 0.5}), ParameterError);
    CHECK_THROWS_AS(spatial_guided_subsample(stream, zero, {1.5, 0.5}), ParameterError);
    CHECK_THROWS_AS(spatial_guided_subsample(stream, DenseFlow(8, 8), {0.5, 0.5}), ShapeError);
    DenseFlow bad(16, 12);
    bad.u[3] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(spatial_guided_subsample(stream, bad, {0.5, 0.5}), DataError);
  }
}

TEST_CASE("temporal_guided_subsample") {
  const DenseFlow zero(8, 8);
  SUBCASE("ratio 1 with infinite tolerance is the identity") {
    auto rng = make_rng(3, 3);
    const auto s = testing_support::random_stream(rng, 8, 8, 300);
    const auto out = temporal_guided_subsample(s, testing_support::random_flow(rng, 8, 8),
                                               {1.0, std::numeric_limits<double>::infinity()});
    CHECK(out.events == s.events);
  }
  SUBCASE("ten timestamps at ratio 0.5 keep five") {
    EventStream s{8, 8, 0, 90, {}};
    for (int k = 0; k < 10; ++k) {
      s.events.push_back({1, 2, 10 * k, 1});
      s.events.push_back({3, 4, 10 * k, -1});
    }
    const auto out = temporal_guided_subsample(s, zero, {0.5, 0.5});
    std::set<std::int64_t> stamps;
    for (const Event& e : out.events) stamps.insert(e.t);
    CHECK(stamps.size() == 5);
    CHECK(out.size() == 10);
    CHECK(is_subsequence(out, s));
  }
  SUBCASE("empty stream") {
    const EventStream s{8, 8, 0, 0, {}};
    CHECK(temporal_guided_subsample(s, zero, {0.5, 0.5}).empty());
  }
}
