#include <doctest.h>

#include <cmath>
#include <cstring>

#include "evmesh/cdc_adm.hpp"
#include "evmesh/error.hpp"
#include "oracles/flow_oracle.hpp"
#include "support.hpp"

using namespace evmesh;

namespace {

bool bit_equal(const DenseFlow& a, const DenseFlow& b) {
  return a.same_shape(b) && std::memcmp(a.u.data(), b.u.data(), a.u.size() * 4) == 0 &&
         std::memcmp(a.v.data(), b.v.data(), a.v.size() * 4) == 0;
}

AttentionOperator random_attention(std::mt19937_64& rng, int h, int w, int k) {
  const auto logits = testing_support::random_values(rng, static_cast<std::size_t>(h) * w * k * k, -2, 2);
  return AttentionOperator::from_logits(h, w, k, logits);
}

}  // namespace

TEST_CASE("upsample_flow_bilinear") {
  auto rng = make_rng(1, 1);
  const auto f = testing_support::random_flow(rng, 5, 4);
  CHECK(bit_equal(upsample_flow_bilinear(f, 1), f));
  const auto c = upsample_flow_bilinear(DenseFlow(3, 2, {1.5F, -0.5F}), 2);
  CHECK(c.width == 6);
  CHECK(c.height == 4);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c.u[i] == 3.0F);
    CHECK(c.v[i] == -1.0F);
  }
  const auto up = upsample_flow_bilinear(f, 3);
  for (int y = 0; y < up.height; ++y) {
    for (int x = 0; x < up.width; ++x) {
      const double sx = (x + 0.5) / 3 - 0.5;
      const double sy = (y + 0.5) / 3 - 0.5;
      CHECK(up.at(x, y).x == doctest::Approx(3.0 * oracle::bilinear(f.u, 5, 4, sx, sy)).epsilon(1e-6));
    }
  }
  for (float v : upsample_flow_bilinear(DenseFlow(4, 4), 4).u) CHECK(v == 0.0F);
  CHECK_THROWS_AS(upsample_flow_bilinear(f, 0), ParameterError);
}

TEST_CASE("attention operators") {
  auto rng = make_rng(2, 2);
  CHECK_NOTHROW(validate_attention(AttentionOperator::identity(4, 4)));
  CHECK_NOTHROW(validate_attention(AttentionOperator::box(4, 4, 3)));
  CHECK_NOTHROW(validate_attention(random_attention(rng, 4, 4, 5)));
  CHECK_THROWS_AS(AttentionOperator::identity(4, 4, 4), ParameterError);
  auto a = AttentionOperator::box(2, 2, 3);
  a.weights[0] = -0.1F;
  a.weights[1] += 0.1F + 1.0F / 9;
  CHECK_THROWS_AS(validate_attention(a), DataError);
  auto b = AttentionOperator::box(2, 2, 3);
  b.weights[5] += 0.01F;
  CHECK_THROWS_AS(validate_attention(b), DataError);
  b.weights.pop_back();
  CHECK_THROWS_AS(validate_attention(b), ShapeError);
}

TEST_CASE("cdc_fuse") {
  auto rng = make_rng(3, 3);
  const auto fbar = testing_support::random_flow(rng, 6, 5);
  const DenseFlow zero(6, 5);
  SUBCASE("zero correction with identity attention returns the input") {
    for (double alpha : {0.0, 0.6, 1.0}) {
      CHECK(bit_equal(cdc_fuse(fbar, zero, AttentionOperator::identity(5, 6), alpha), fbar));
      CHECK(bit_equal(cdc_fuse(fbar, zero, AttentionOperator::identity(5, 6, 3), alpha, CorrectionMode::kAdditive),
                      fbar));
    }
  }
  SUBCASE("constant fields survive any row-stochastic attention") {
    const DenseFlow c(6, 5, {2.0F, -3.0F});
    for (double alpha : {0.0, 0.3, 0.6, 1.0}) {
      const auto out = cdc_fuse(c, zero, random_attention(rng, 5, 6, 3), alpha);
      for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out.u[i] == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(out.v[i] == doctest::Approx(-3.0).epsilon(1e-6));
      }
    }
  }
  SUBCASE("alpha 1 keeps only the warped branch") {
    const auto df = testing_support::random_flow(rng, 6, 5, 1.5);
    const auto out = cdc_fuse(fbar, df, random_attention(rng, 5, 6, 3), 1.0);
    for (int y = 0; y < 5; ++y) {
      for (int x = 0; x < 6; ++x) {
        const auto i = fbar.index(x, y);
        CHECK(out.u[i] == doctest::Approx(oracle::bilinear(fbar.u, 6, 5, x + df.u[i], y + df.v[i])).epsilon(1e-6));
      }
    }
  }
  SUBCASE("matches the scalar formula") {
    const auto f4 = testing_support::random_flow(rng, 4, 4);
    const auto df = testing_support::random_flow(rng, 4, 4, 1.0);
    const auto att = random_attention(rng, 4, 4, 3);
    const auto out = cdc_fuse(f4, df, att, 0.6);
    const auto wu = oracle::fused_component(f4.u, df.u, df.v, att.weights, 3, 4, 4, 0.6);
    const auto wv = oracle::fused_component(f4.v, df.u, df.v, att.weights, 3, 4, 4, 0.6);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(std::fabs(out.u[i] - wu[i]) <= 1e-6);
      CHECK(std::fabs(out.v[i] - wv[i]) <= 1e-6);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(cdc_fuse(fbar, DenseFlow(5, 5), AttentionOperator::identity(5, 6)), ShapeError);
    CHECK_THROWS_AS(cdc_fuse(fbar, zero, AttentionOperator::identity(4, 6)), ShapeError);
    auto bad = AttentionOperator::identity(5, 6, 3);
    bad.weights[4] = 0.5F;
    CHECK_THROWS_AS(cdc_fuse(fbar, zero, bad), DataError);
    CHECK_THROWS_AS(cdc_fuse(fbar, zero, AttentionOperator::identity(5, 6), 1.5), ParameterError);
  }
}

TEST_CASE("confidence_fuse") {
  auto rng = make_rng(4, 4);
  const auto a = testing_support::random_flow(rng, 5, 3);
  const auto b = testing_support::random_flow(rng, 5, 3);
  CHECK(bit_equal(confidence_fuse(a, b, {ImageF(5, 3, 1.0F)}), a));
  CHECK(bit_equal(confidence_fuse(a, b, {ImageF(5, 3, 0.0F)}), b));
  const auto mid = confidence_fuse(a, b, {ImageF(5, 3, 0.5F)});
  for (std::size_t i = 0; i < mid.size(); ++i) CHECK(mid.u[i] == doctest::Approx(0.5 * (a.u[i] + b.u[i])));
  ConfidenceMap w{ImageF(5, 3)};
  for (float& v : w.weights.values) v = static_cast<float>(uniform01(rng));
  const auto out = confidence_fuse(a, b, w);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out.u[i] >= std::min(a.u[i], b.u[i]) - 1e-6F);
    CHECK(out.u[i] <= std::max(a.u[i], b.u[i]) + 1e-6F);
  }
  CHECK_THROWS_AS(confidence_fuse(a, b, {ImageF(5, 3, 1.2F)}), DataError);
  CHECK_THROWS_AS(confidence_fuse(a, b, {ImageF(5, 3, -0.1F)}), DataError);
  CHECK_THROWS_AS(confidence_fuse(a, b, {ImageF(4, 3, 0.5F)}), ShapeError);
}

TEST_CASE("losses") {
  auto rng = make_rng(5, 5);
  std::vector<VoxelGrid> preds{VoxelGrid(5, 8, 8), VoxelGrid(5, 4, 4), VoxelGrid(5, 2, 2)};
  for (auto& g : preds) g.values = testing_support::random_values(rng, g.values.size());
  SUBCASE("zero residual gives three xi") {
    CHECK(std::fabs(mdc_loss(preds, preds) - 0.003) <= 1e-9);
  }
  SUBCASE("hand arithmetic with xi = 0") {
    std::vector<VoxelGrid> p(3, VoxelGrid(1, 1, 1));
    std::vector<VoxelGrid> g(3, VoxelGrid(1, 1, 1));
    p[0].values[0] = 0.003F;
    p[1].values[0] = 0.004F;
    CHECK(mdc_loss(p, g, 0.0) == doctest::Approx(0.007).epsilon(1e-6));
  }
  SUBCASE("symmetric and bounded below") {
    std::vector<VoxelGrid> other = preds;
    for (auto& g : other) g.values = testing_support::random_values(rng, g.values.size());
    CHECK(mdc_loss(preds, other) == doctest::Approx(mdc_loss(other, preds)).epsilon(1e-12));
    CHECK(mdc_loss(preds, other) > 0.003);
  }
  SUBCASE("shape errors") {
    std::vector<VoxelGrid> wrong = preds;
    wrong[1] = VoxelGrid(5, 4, 3);
    CHECK_THROWS_AS(mdc_loss(preds, wrong), ShapeError);
    CHECK_THROWS_AS(mdc_loss(std::span(preds).first(2), preds), ShapeError);
  }
  SUBCASE("density loss") {
    VoxelGrid a(1, 2, 2);
    VoxelGrid b(1, 2, 2);
    a.values = {1, 1, 1, 0};
    b.values = {1, 0, 1, 0};
    CHECK(mds_loss(a, b) == 0.25);
    CHECK(mds_loss(b, a) == 0.25);
    CHECK(mds_loss(a, a) == 0.0);
  }
  SUBCASE("total loss") {
    CHECK(total_loss(1.0, 1.0, 0.0) == 10.1);
    CHECK(total_loss(0.0, 0.0, 0.42) == 0.42);
    CHECK(total_loss(2.0, 3.0, 4.0) == doctest::Approx(total_loss(2.0, 0, 0) + total_loss(0, 3.0, 0) + 4.0));
    CHECK(total_loss(1.0, 2.0, 3.0, 0.5, 0.25) == 0.5 + 0.5 + 3.0);
  }
}

TEST_CASE("mds_fuse") {
  auto rng = make_rng(6, 6);
  VoxelGrid a(3, 4, 5);
  VoxelGrid b(3, 4, 5);
  a.values = testing_support::random_values(rng, a.values.size());
  b.values = testing_support::random_values(rng, b.values.size());
  SUBCASE("saturated logits pick the changed grid") {
    FeatureMap l(2, 4, 5);
    std::fill(l.values.begin(), l.values.begin() + 20, 50.0F);
    std::fill(l.values.begin() + 20, l.values.end(), -50.0F);
    const auto out = mds_fuse(a, b, l);
    for (std::size_t i = 0; i < out.values.size(); ++i) CHECK(std::fabs(out.values[i] - a.values[i]) <= 1e-6);
  }
  SUBCASE("equal logits average") {
    const auto out = mds_fuse(a, b, FeatureMap(2, 4, 5, 0.7F));
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      CHECK(out.values[i] == doctest::Approx(0.5 * (a.values[i] + b.values[i])).epsilon(1e-6));
    }
  }
  SUBCASE("random logits follow the convex-combination formula") {
    FeatureMap l(2, 4, 5);
    l.values = testing_support::random_values(rng, l.values.size(), -3, 3);
    const auto out = mds_fuse(a, b, l);
    for (int bin = 0; bin < 3; ++bin) {
      for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 5; ++x) {
          const double e0 = std::exp(double(l.at(0, y, x)));
          const double e1 = std::exp(double(l.at(1, y, x)));
          const double want = (e0 * a.at(bin, y, x) + e1 * b.at(bin, y, x)) / (e0 + e1);
          CHECK(std::fabs(out.at(bin, y, x) - want) <= 1e-6);
        }
      }
    }
  }
  SUBCASE("spatially constant weights keep density between the inputs") {
    VoxelGrid sparse(2, 4, 4);
    VoxelGrid dense(2, 4, 4);
    std::fill(dense.values.begin(), dense.values.end(), 0.5F);
    sparse.at(0, 1, 1) = 1.0F;
    const auto out = mds_fuse(sparse, dense, FeatureMap(2, 4, 4, 0.0F));
    const double d = density(out);
    CHECK(d >= std::min(density(sparse), density(dense)));
    CHECK(d <= std::max(density(sparse), density(dense)));
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(mds_fuse(a, VoxelGrid(2, 4, 5), FeatureMap(2, 4, 5)), ShapeError);
    CHECK_THROWS_AS(mds_fuse(a, b, FeatureMap(3, 4, 5)), ShapeError);
  }
}
