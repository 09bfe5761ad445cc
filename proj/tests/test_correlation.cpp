#include <doctest.h>

#include <cmath>

#include "evmesh/correlation.hpp"
#include "evmesh/error.hpp"
#include "evmesh/parallel.hpp"
#include "oracles/correlation_oracle.hpp"
#include "support.hpp"

using namespace evmesh;

namespace {

FeatureMap random_features(std::mt19937_64& rng, int c, int h, int w) {
  FeatureMap f(c, h, w);
  f.values = testing_support::random_values(rng, f.values.size());
  return f;
}

}  // namespace

TEST_CASE("search grids") {
  SUBCASE("active counts") {
    const std::vector<std::size_t> want{1, 9, 21, 33, 49, 69, 93};
    for (int r = 0; r <= 6; ++r) {
      CAPTURE(r);
      CHECK(dilated_mask(r).active_count() == want[static_cast<std::size_t>(r)]);
      CHECK(full_grid(r).active_count() == static_cast<std::size_t>((2 * r + 1) * (2 * r + 1)));
    }
  }
  SUBCASE("mask matches the rule and is symmetric") {
    for (int r = 0; r <= 7; ++r) {
      const auto g = dilated_mask(r);
      CHECK(g.enabled(0, 0));
      std::size_t count = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          CHECK(g.enabled(dx, dy) == oracle::dilated_active(r, dx, dy));
          CHECK(g.enabled(dx, dy) == g.enabled(-dx, -dy));
          CHECK(g.enabled(dx, dy) == g.enabled(-dx, dy));
          CHECK(g.enabled(dx, dy) == g.enabled(dy, dx));
          count += g.enabled(dx, dy) ? 1 : 0;
        }
      }
      CHECK(count == g.active_count());
    }
  }
  SUBCASE("the dense core within Manhattan distance 3 is always active") {
    for (int r = 2; r <= 7; ++r) {
      const auto g = dilated_mask(r);
      std::size_t core = 0;
      for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
          if (std::abs(dx) + std::abs(dy) > 3 || std::abs(dx) > r || std::abs(dy) > r) continue;
          CHECK(g.enabled(dx, dy));
          ++core;
        }
      }
      CHECK(core == (r == 2 ? 21U : 25U));
    }
  }
  SUBCASE("lower bound on the active count") {
    for (int r : {2, 4, 5, 6, 7, 8}) {
      const int m = std::min(r, 3);
      CHECK(dilated_mask(r).active_count() >= static_cast<std::size_t>((2 * m + 1) * (2 * m + 1) - 4));
    }
  }
  CHECK_THROWS_AS(dilated_mask(-1), ParameterError);
}

TEST_CASE("correlate agrees with the nested-loop oracle") {
  auto rng = make_rng(7, 7);
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 1 + static_cast<int>(rng() % 5);
    const auto a = random_features(rng, c, 6, 9);
    const auto b = random_features(rng, c, 6, 9);
    const int r = static_cast<int>(rng() % 5);
    for (const auto& grid : {dilated_mask(r), full_grid(r)}) {
      for (auto norm : {CorrelationNorm::kActiveCount, CorrelationNorm::kFeatureDim, CorrelationNorm::kNone}) {
        const auto cv = correlate(a, b, grid, norm);
        REQUIRE(cv.offsets == grid.active);
        const double div = norm == CorrelationNorm::kActiveCount ? double(grid.active_count())
                           : norm == CorrelationNorm::kFeatureDim ? double(c)
                                                                  : 1.0;
        for (std::size_t m = 0; m < cv.offsets.size(); ++m) {
          for (int y = 0; y < 6; ++y) {
            for (int x = 0; x < 9; ++x) {
              const double want =
                  oracle::correlation_at(a.values, b.values, c, 6, 9, x, y, cv.offsets[m].dx, cv.offsets[m].dy, div);
              CHECK(std::fabs(cv.at(m, y, x) - want) <= 1e-6);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("correlation properties") {
  auto rng = make_rng(8, 8);
  const auto a = random_features(rng, 3, 7, 7);
  const auto b = random_features(rng, 3, 7, 7);
  SUBCASE("dilated scores are the full-grid scores restricted to active offsets") {
    const auto full = correlate(a, b, full_grid(4), CorrelationNorm::kNone);
    const auto dil = correlate(a, b, dilated_mask(4), CorrelationNorm::kNone);
    for (std::size_t m = 0; m < dil.offsets.size(); ++m) {
      const auto it = std::find(full.offsets.begin(), full.offsets.end(), dil.offsets[m]);
      REQUIRE(it != full.offsets.end());
      const auto fm = static_cast<std::size_t>(it - full.offsets.begin());
      for (std::size_t i = 0; i < 49; ++i) CHECK(dil.plane(m)[i] == full.plane(fm)[i]);
    }
  }
  SUBCASE("zero features give zero volumes and shape mismatch is rejected") {
    const auto cv = correlate(FeatureMap(3, 7, 7), b, dilated_mask(2));
    for (float v : cv.values) CHECK(v == 0.0F);
    CHECK_THROWS_AS(correlate(a, FeatureMap(3, 6, 7), dilated_mask(2)), ShapeError);
  }
  SUBCASE("independent of thread count") {
    set_thread_count(1);
    const auto x = correlate(a, b, dilated_mask(4));
    set_thread_count(4);
    const auto y = correlate(a, b, dilated_mask(4));
    set_thread_count(0);
    CHECK(x.values == y.values);
  }
}

TEST_CASE("average_pool") {
  FeatureMap f(1, 4, 5);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = static_cast<float>(i);
  const auto p = average_pool(f, 2);
  CHECK(p.height == 2);
  CHECK(p.width == 2);
  CHECK(p.at(0, 0, 0) == doctest::Approx((0 + 1 + 5 + 6) / 4.0));
  CHECK(p.at(0, 1, 1) == doctest::Approx((12 + 13 + 17 + 18) / 4.0));
  CHECK(average_pool(f, 1).values == f.values);
  CHECK_THROWS_AS(average_pool(f, 0), ParameterError);
}

TEST_CASE("warp_features and residual_update") {
  auto rng = make_rng(9, 9);
  const auto f = random_features(rng, 2, 6, 8);
  SUBCASE("zero flow is the identity") { CHECK(warp_features(f, DenseFlow(8, 6)).values == f.values); }
  SUBCASE("integer flow reads the shifted feature") {
    const auto w = warp_features(f, DenseFlow(8, 6, {1.0F, 1.0F}));
    for (int c = 0; c < 2; ++c) {
      for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 7; ++x) CHECK(w.at(c, y, x) == f.at(c, y + 1, x + 1));
      }
    }
    CHECK_THROWS_AS(warp_features(f, DenseFlow(8, 5)), ShapeError);
  }
  SUBCASE("residual update adds componentwise") {
    const auto a = testing_support::random_flow(rng, 5, 4);
    const auto b = testing_support::random_flow(rng, 5, 4);
    const auto r = residual_update(a, b);
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(r.u[i] == a.u[i] + b.u[i]);
      CHECK(r.v[i] == a.v[i] + b.v[i]);
    }
    CHECK_THROWS_AS(residual_update(a, DenseFlow(4, 4)), ShapeError);
  }
}
