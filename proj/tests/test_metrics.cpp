#include <doctest.h>

#include <cmath>

#include "evmesh/error.hpp"
#include "evmesh/metrics.hpp"
#include "support.hpp"

using namespace evmesh;

namespace {

DenseFlow offset(const DenseFlow& f, float du, float dv) {
  DenseFlow g = f;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.u[i] += du;
    g.v[i] += dv;
  }
  return g;
}

}  // namespace

TEST_CASE("epe") {
  auto rng = make_rng(1, 2);
  const auto gt = testing_support::random_flow(rng, 8, 6, 0.5);
  CHECK(epe(gt, gt) == 0.0);
  CHECK(std::fabs(epe(DenseFlow(8, 6, {3.0F, 4.0F}), DenseFlow(8, 6)) - 5.0) <= 1e-9);
  DenseFlow half(8, 6);
  for (std::size_t i = 0; i < half.size(); i += 2) half.v[i] = 2.0F;
  CHECK(epe(half, DenseFlow(8, 6)) == 1.0);
  const auto pred = testing_support::random_flow(rng, 8, 6);
  CHECK(epe(pred, gt) == doctest::Approx(epe(gt, pred)).epsilon(1e-15));
  CHECK(epe(offset(pred, 3, -1), offset(gt, 3, -1)) == doctest::Approx(epe(pred, gt)).epsilon(1e-6));
}

TEST_CASE("masks") {
  DenseFlow pred(4, 2);
  pred.u[0] = 10.0F;
  EvalMask m = EvalMask::full(4, 2);
  CHECK(m.count() == 8);
  CHECK(epe(pred, DenseFlow(4, 2), m) == doctest::Approx(10.0 / 8));
  m.valid[0] = 0;
  CHECK(epe(pred, DenseFlow(4, 2), m) == 0.0);
  std::fill(m.valid.begin(), m.valid.end(), 0);
  CHECK_THROWS_AS(epe(pred, DenseFlow(4, 2), m), DataError);
  CHECK_THROWS_AS(epe(pred, DenseFlow(4, 2), EvalMask::full(3, 2)), ShapeError);
  CHECK_THROWS_AS(epe(pred, DenseFlow(4, 3)), ShapeError);
}

TEST_CASE("npe") {
  const DenseFlow gt(10, 4);
  const DenseFlow uniform(10, 4, {1.5F, 2.0F});
  CHECK(npe(gt, gt, 1.0) == 0.0);
  CHECK(npe(uniform, gt, 2.0) == 100.0);
  CHECK(npe(uniform, gt, 3.0) == 0.0);
  DenseFlow quarter(10, 4);
  for (std::size_t i = 0; i < quarter.size(); i += 4) quarter.u[i] = 10.0F;
  CHECK(npe(quarter, gt, 3.0) == 25.0);
  auto rng = make_rng(2, 2);
  const auto p = testing_support::random_flow(rng, 10, 4, 5.0);
  double last = 101.0;
  for (double n = 0.0; n < 10.0; n += 0.5) {
    const double v = npe(p, gt, n);
    CHECK(v <= last);
    CHECK(v >= 0.0);
    CHECK(v <= 100.0);
    last = v;
  }
  CHECK(npe(offset(p, 7, 7), offset(gt, 7, 7), 2.0) == npe(p, gt, 2.0));
}

TEST_CASE("angular_error") {
  CHECK(angular_error(DenseFlow(3, 3, {1, 2}), DenseFlow(3, 3, {1, 2})) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::fabs(angular_error(DenseFlow(3, 3, {0, 1}), DenseFlow(3, 3, {1, 0})) - 60.0) <= 1e-6);
  // the homogeneous angle depends on magnitude
  CHECK(angular_error(DenseFlow(3, 3, {0, 2}), DenseFlow(3, 3, {2, 0})) != doctest::Approx(60.0));
}

TEST_CASE("outlier_pct") {
  const DenseFlow gt(4, 4, {60.0F, 80.0F});
  CHECK(outlier_pct(gt, gt) == 0.0);
  CHECK(outlier_pct(offset(gt, 4, 0), gt) == 100.0);
  CHECK(outlier_pct(offset(gt, 2, 0), gt) == 0.0);
  // small gt: 5% rule triggers before 3 px
  const DenseFlow small(4, 4, {1.0F, 0.0F});
  CHECK(outlier_pct(offset(small, 0.1F, 0), small) == 100.0);
  CHECK(outlier_pct(offset(small, 0.01F, 0), small) == 0.0);
}

TEST_CASE("evaluation rows and csv") {
  const DenseFlow gt(6, 6);
  const auto rows = evaluate_flow("seq", DenseFlow(6, 6, {3, 4}), gt);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].metric == "EPE");
  CHECK(rows[0].value == 5.0);
  CHECK(rows[1].metric == "1PE");
  CHECK(rows[4].metric == "AE");
  CHECK(rows[5].metric == "%Out");
  const auto csv = metrics_csv(rows);
  CHECK(csv.rfind("sequence,metric,value\nseq,EPE,5\n", 0) == 0);

  MetricOptions only;
  only.angular = false;
  only.outliers = false;
  only.npe_thresholds = {0.5};
  const auto r2 = evaluate_flow("x", gt, gt, only);
  REQUIRE(r2.size() == 2);
  CHECK(r2[1].metric == "0.5PE");

  const MeshFlow m(MeshGridSpec{4, 4}, {3.0F, 4.0F});
  const auto mesh_rows = evaluate_meshflow("m", m, MeshFlow(MeshGridSpec{4, 4}), 20, 30);
  CHECK(mesh_rows[0].value == 5.0);
  CHECK_THROWS_AS(evaluate_meshflow("m", m, MeshFlow(MeshGridSpec{4, 3}), 20, 30), ShapeError);
}
