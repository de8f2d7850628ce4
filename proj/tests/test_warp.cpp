#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tcd/warp.hpp"
#include "test_util.hpp"

using namespace tcd;

namespace {

Image make2x2() {
  Image img(2, 2, 1);
  img.at(0, 0, 0) = 0.0;
  img.at(0, 0, 1) = 1.0;
  img.at(0, 1, 0) = 2.0;
  img.at(0, 1, 1) = 3.0;
  return img;
}

DisplacementField constant_field(int h, int w, double dx, double dy) {
  DisplacementField f(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      f.at(0, y, x) = dx;
      f.at(1, y, x) = dy;
    }
  return f;
}

}  // namespace

TEST_CASE("warp with zero field is the identity") {
  const Image img = make2x2();
  const Image out = warp(img, DisplacementField(2, 2));
  for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(out.data[i] == img.data[i]);

  Rng rng(3);
  const Image rnd = testing::random_image(7, 5, 3, rng);
  const Image out2 = warp(rnd, DisplacementField(7, 5));
  for (std::size_t i = 0; i < rnd.data.size(); ++i) CHECK(out2.data[i] == rnd.data[i]);
}

TEST_CASE("warp interpolates the cell center") {
  const Image img = make2x2();
  DisplacementField f(2, 2);
  f.at(0, 0, 0) = 0.5;
  f.at(1, 0, 0) = 0.5;
  const Image out = warp(img, f);
  CHECK(out.at(0, 0, 0) == doctest::Approx(1.5));  // (0+1+2+3)/4
}

TEST_CASE("warp clamps to the border") {
  const Image img = make2x2();
  const Image out = warp(img, constant_field(2, 2, -1.0, -1.0));
  for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("constant integer displacement is an index shift away from borders") {
  Rng rng(11);
  const Image img = testing::random_image(9, 8, 2, rng);
  const Image out = warp(img, constant_field(9, 8, 2.0, -1.0));
  for (int c = 0; c < 2; ++c)
    for (int y = 1; y < 9; ++y)
      for (int x = 0; x < 6; ++x) CHECK(out.at(c, y, x) == img.at(c, y - 1, x + 2));
}

TEST_CASE("the output grid follows the field, not the image") {
  Rng rng(29);
  const Image img = testing::random_image(9, 7, 2, rng);
  const DisplacementField field(4, 3);
  const Image out = warp(img, field);
  CHECK(out.height == 4);
  CHECK(out.width == 3);
  CHECK(out.channels == 2);
  for (int c = 0; c < 2; ++c)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 3; ++x) CHECK(out.at(c, y, x) == img.at(c, y, x));
}

TEST_CASE("warp rejects non-finite fields") {
  DisplacementField f(2, 2);
  f.at(0, 1, 1) = std::nan("");
  CHECK_THROWS_AS(warp(make2x2(), f), NumericError);
}

TEST_CASE("warp_gradient with zero upstream is zero") {
  Rng rng(5);
  const Image img = testing::random_image(6, 6, 1, rng);
  const DisplacementField f = testing::random_displacement(6, 6, rng, 0.8);
  const DisplacementField g = warp_gradient(img, f, Image(6, 6, 1));
  for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("warp_gradient at the origin with unit upstream") {
  const Image img = make2x2();
  Image upstream(2, 2, 1);
  upstream.at(0, 0, 0) = 1.0;
  const DisplacementField g = warp_gradient(img, DisplacementField(2, 2), upstream);
  CHECK(g.at(0, 0, 0) == doctest::Approx(1.0));
  CHECK(g.at(1, 0, 0) == doctest::Approx(2.0));
  CHECK(g.at(0, 1, 1) == 0.0);
  CHECK(g.at(1, 1, 1) == 0.0);
}

TEST_CASE("warp_gradient matches central finite differences") {
  Rng rng(17);
  const Image img = smooth_noise(8, 8, 2.0, 99);
  Image upstream(8, 8, 1);
  for (double& v : upstream.data) v = rng.uniform(-1.0, 1.0);
  DisplacementField f = testing::random_displacement_offgrid(8, 8, rng);

  const DisplacementField analytic = warp_gradient(img, f, upstream);
  auto objective = [&]() {
    const Image w = warp(img, f);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.data.size(); ++i) acc += upstream.data[i] * w.data[i];
    return acc;
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    const double fd = testing::central_diff(f.data, i, objective, 1e-4);
    const double denom = std::max(1.0, std::abs(fd));
    worst = std::max(worst, std::abs(analytic.data[i] - fd) / denom);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("compose_scoremap basics") {
  ScoreMap map(2, 2);
  map.at(0, 0) = 0.0;
  map.at(0, 1) = 2.0;
  map.at(1, 0) = 0.0;
  map.at(1, 1) = 2.0;

  SUBCASE("zero field is the identity") {
    const ScoreMap out = compose_scoremap(map, DisplacementField(2, 2));
    for (std::size_t i = 0; i < map.data.size(); ++i) CHECK(out.data[i] == map.data[i]);
  }
  SUBCASE("integer shift is exact") {
    Rng rng(7);
    ScoreMap big(6, 6);
    for (double& v : big.data) v = rng.uniform(0.0, 5.0);
    const ScoreMap out = compose_scoremap(big, constant_field(6, 6, 1.0, 0.0));
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 5; ++x) CHECK(out.at(y, x) == big.at(y, x + 1));
  }
  SUBCASE("half-pixel shift averages columns") {
    const ScoreMap out = compose_scoremap(map, constant_field(2, 2, 0.5, 0.0));
    CHECK(out.at(0, 0) == doctest::Approx(1.0));
    CHECK(out.at(1, 0) == doctest::Approx(1.0));
  }
}

TEST_CASE("jacobian determinant") {
  SUBCASE("zero field gives 1 everywhere") {
    const ScoreMap det = jacobian_determinant(DisplacementField(5, 4));
    for (double v : det.data) CHECK(v == doctest::Approx(1.0));
  }
  SUBCASE("any constant field gives 1 everywhere") {
    Rng rng(23);
    for (int rep = 0; rep < 5; ++rep) {
      const ScoreMap det = jacobian_determinant(
          constant_field(6, 6, rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)));
      for (double v : det.data) CHECK(v == doctest::Approx(1.0));
    }
  }
  SUBCASE("uniform 1.1 scaling gives det 1.21") {
    DisplacementField f(8, 8);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        f.at(0, y, x) = 0.1 * x;
        f.at(1, y, x) = 0.1 * y;
      }
    const ScoreMap det = jacobian_determinant(f);
    for (double v : det.data) CHECK(v == doctest::Approx(1.21));
  }
  SUBCASE("a fold flips the sign") {
    DisplacementField f(8, 8);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) f.at(0, y, x) = -2.0 * x;
    const ScoreMap det = jacobian_determinant(f);
    for (double v : det.data) CHECK(v == doctest::Approx(-1.0));
  }
}

TEST_CASE("neighbor graph degrees sum to twice the edge count") {
  for (const auto [h, w] : {std::pair{2, 2}, {3, 5}, {7, 4}}) {
    const NeighborGraph g(h, w);
    int sum = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) sum += g.degree(y, x);
    CHECK(sum == 2 * (2 * h * w - h - w));
    int directed = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) g.for_each_neighbor(y, x, [&](int, int) { ++directed; });
    CHECK(directed == sum);
  }
}

TEST_CASE("warp_nearest moves labels without blending") {
  Image labels(4, 4, 1);
  labels.at(0, 1, 1) = 3.0;
  const Image out = warp_nearest(labels, constant_field(4, 4, 1.0, 0.0));
  CHECK(out.at(0, 1, 0) == 3.0);
  CHECK(out.at(0, 1, 1) == 0.0);
}

TEST_CASE("upsample_field rescales displacement magnitudes") {
  VariationalField q(4, 4);
  for (double& v : q.mu) v = 1.0;
  const VariationalField up = upsample_field(q, 7, 7);
  CHECK(up.mu[0] == doctest::Approx(2.0));  // (7-1)/(4-1)
  CHECK(up.log_v[0] == doctest::Approx(0.0));
}
