#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "scenegen/geometry.hpp"

using namespace scenegen;
using namespace scenegen::testing;
using doctest::Approx;

TEST_CASE("arclength_parameterize on a straight polyline") {
  Points2 pts(3, 2);
  pts << 0, 0, 1, 0, 2, 0;
  const Lane lane = arclength_parameterize(pts);
  CHECK(lane.cum_s[0] == 0.0);
  CHECK(lane.cum_s[1] == Approx(1.0));
  CHECK(lane.cum_s[2] == Approx(2.0));
  for (int k = 0; k < 3; ++k) {
    CHECK(lane.heading[k] == Approx(0.0));
    CHECK(lane.curvature[k] == Approx(0.0));
  }
}

TEST_CASE("vertical segment heading") {
  Points2 pts(2, 2);
  pts << 0, 0, 0, 3;
  const Lane lane = arclength_parameterize(pts);
  CHECK(lane.length() == Approx(3.0));
  CHECK(lane.heading[0] == Approx(std::numbers::pi / 2));
  CHECK(lane.heading[1] == Approx(std::numbers::pi / 2));
}

TEST_CASE("quarter circle length and curvature") {
  const Lane lane = arc_lane({0, 0}, 10.0, 0.0, std::numbers::pi / 2, 64);
  const double analytic = 10.0 * std::numbers::pi / 2;
  CHECK(std::abs(lane.length() - analytic) / analytic < 0.005);
  for (int k = 1; k + 1 < lane.size(); ++k) CHECK(lane.curvature[k] == Approx(0.1).epsilon(0.01));
}

TEST_CASE("cumulative arc length equals the sum of segment lengths") {
  std::mt19937_64 rng(1);
  Points2 pts(30, 2);
  Vec2 p(0, 0);
  for (int k = 0; k < 30; ++k) {
    pts.row(k) = p.transpose();
    p += Vec2(uniform(rng, 0.1, 2.0), uniform(rng, -1.0, 1.0));
  }
  const Lane lane = arclength_parameterize(pts);
  double total = 0.0;
  for (int k = 1; k < 30; ++k) {
    total += (pts.row(k) - pts.row(k - 1)).norm();
    CHECK(std::abs(lane.cum_s[k] - total) <= 1e-9);
    CHECK(lane.cum_s[k] > lane.cum_s[k - 1]);
  }
  const Vec2 dir = (lane.point(1) - lane.point(0));
  CHECK(lane.heading[0] == Approx(std::atan2(dir.y(), dir.x())));
  CHECK(lane.heading[29] == lane.heading[28]);
}

TEST_CASE("arc length is additive over concatenation") {
  Points2 a(4, 2), b(3, 2), ab(6, 2);
  a << 0, 0, 1, 1, 3, 1, 4, 3;
  b << 4, 3, 6, 3, 7, 5;
  ab << a, b.bottomRows(2);
  const Lane la = arclength_parameterize(a), lb = arclength_parameterize(b),
             lab = arclength_parameterize(ab);
  for (int k = 0; k < 4; ++k) CHECK(lab.cum_s[k] == Approx(la.cum_s[k]));
  for (int k = 1; k < 3; ++k) CHECK(lab.cum_s[3 + k] == Approx(la.length() + lb.cum_s[k]));
}

TEST_CASE("degenerate lanes are rejected") {
  Points2 one(1, 2);
  one << 0, 0;
  CHECK_THROWS_AS(arclength_parameterize(one), Error);
  Points2 dup(3, 2);
  dup << 0, 0, 1, 0, 1, 0;
  try {
    arclength_parameterize(dup);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateLane);
  }
}

TEST_CASE("validate_map checks bounds") {
  VectorMap m = make_map({line_lane({0, 0}, {10, 0})});
  CHECK_NOTHROW(validate_map(m));
  m.bounds.xmax = 5.0;
  CHECK_THROWS_AS(validate_map(m), Error);
}

TEST_CASE("cart_to_frenet sign convention") {
  const Lane lane = line_lane({0, 0}, {10, 0});
  FrenetCoord fc = cart_to_frenet({1, 0.5}, lane);
  CHECK(fc.s == Approx(1.0));
  CHECK(fc.d == Approx(0.5));
  fc = cart_to_frenet({1, -0.5}, lane);
  CHECK(fc.s == Approx(1.0));
  CHECK(fc.d == Approx(-0.5));
}

TEST_CASE("cart_to_frenet on a dense quarter circle matches a dense projection oracle") {
  // Clockwise arc from (-10, 0) to (0, 10); its left side is the outside.
  const Lane lane = arc_lane({0, 0}, 10.0, std::numbers::pi, std::numbers::pi / 2, 2000);
  const Vec2 p(0, 11);
  const FrenetCoord fc = cart_to_frenet(p, lane);

  const int samples = 100000;
  double best = 1e300, best_s = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double a = std::numbers::pi - (std::numbers::pi / 2) * i / samples;
    const Vec2 q(10 * std::cos(a), 10 * std::sin(a));
    const double dist = (q - p).norm();
    if (dist < best) {
      best = dist;
      best_s = 10.0 * (std::numbers::pi / 2) * i / samples;
    }
  }
  CHECK(fc.s == Approx(best_s).epsilon(0.01));
  CHECK(fc.s == Approx(15.708).epsilon(0.01));
  CHECK(fc.d == Approx(best).epsilon(0.01));
  CHECK(fc.d > 0.0);
}

TEST_CASE("frenet_to_cart on a straight lane") {
  const Lane lane = line_lane({0, 0}, {10, 0});
  Vec2 p = frenet_to_cart({2, 0}, lane);
  CHECK(p.x() == Approx(2.0));
  CHECK(p.y() == Approx(0.0));
  p = frenet_to_cart({2, 1}, lane);
  CHECK(p.x() == Approx(2.0));
  CHECK(p.y() == Approx(1.0));
}

TEST_CASE("frenet_to_cart extrapolates along end headings") {
  const Lane lane = line_lane({0, 0}, {0, 10});
  const Vec2 past = frenet_to_cart({12, 0}, lane);
  CHECK(past.x() == Approx(0.0));
  CHECK(past.y() == Approx(12.0));
  const Vec2 before = frenet_to_cart({-2, 1}, lane);
  CHECK(before.x() == Approx(-1.0));
  CHECK(before.y() == Approx(-2.0));
}

TEST_CASE("Cartesian and Frenet round trip on curved lanes") {
  std::mt19937_64 rng(7);
  const std::vector<Lane> lanes = {
      arc_lane({0, 0}, 20.0, 0.0, 1.5, 40), arc_lane({5, -3}, 12.0, 2.0, -1.0, 80),
      line_lane({-3, 4}, {30, 12}, 7)};
  for (const Lane& lane : lanes) {
    for (int k = 0; k < 300; ++k) {
      const FrenetCoord fc{uniform(rng, 0.0, lane.length()), uniform(rng, -4.0, 4.0)};
      const Vec2 p = frenet_to_cart(fc, lane);
      const FrenetCoord back = cart_to_frenet(p, lane);
      CHECK((frenet_to_cart(back, lane) - p).norm() <= 1e-6);
      CHECK(std::abs(back.s - fc.s) <= 1e-6);
      CHECK(std::abs(back.d - fc.d) <= 1e-6);
    }
  }
}

TEST_CASE("Frenet coordinates are invariant under rigid motion") {
  std::mt19937_64 rng(9);
  const Lane lane = arc_lane({2, 1}, 15.0, -0.5, 1.2, 30);
  for (int trial = 0; trial < 20; ++trial) {
    const double angle = uniform(rng, -3.0, 3.0);
    const Vec2 shift(uniform(rng, -50, 50), uniform(rng, -50, 50));
    Points2 moved(lane.size(), 2);
    for (int k = 0; k < lane.size(); ++k) {
      moved.row(k) = (rotate(lane.point(k), angle) + shift).transpose();
    }
    const Lane other = arclength_parameterize(moved);
    const Vec2 p(uniform(rng, -10, 20), uniform(rng, -5, 20));
    const FrenetCoord a = cart_to_frenet(p, lane);
    const FrenetCoord b = cart_to_frenet(rotate(p, angle) + shift, other);
    CHECK(std::abs(a.s - b.s) <= 1e-9);
    CHECK(std::abs(a.d - b.d) <= 1e-9);
  }
}

TEST_CASE("nearest_lanes examples") {
  const VectorMap one = make_map({line_lane({0, 0}, {10, 0})});
  auto hits = nearest_lanes({3, 0}, one, 1.0);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].lane == 0);
  CHECK(hits[0].distance == Approx(0.0));

  CHECK(nearest_lanes({3, 5}, one, 4.0).empty());

  const VectorMap two = make_map({line_lane({0, 3}, {10, 3}), line_lane({0, 0}, {10, 0})});
  hits = nearest_lanes({5, 1.5}, two, 2.0);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].lane == 0);
  CHECK(hits[1].lane == 1);
  CHECK(hits[0].distance == Approx(1.5));
  CHECK(hits[1].distance == Approx(1.5));
}

double brute_distance(const Vec2& p, const Lane& lane) {
  double best = 1e300;
  for (int k = 0; k + 1 < lane.size(); ++k) {
    const Vec2 a = lane.point(k), b = lane.point(k + 1);
    const double u = std::clamp((p - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
    best = std::min(best, (a + u * (b - a) - p).norm());
  }
  return best;
}

TEST_CASE("nearest_lanes agrees with exhaustive search on 50 lanes") {
  std::mt19937_64 rng(21);
  std::vector<Lane> lanes;
  for (int l = 0; l < 50; ++l) {
    const Vec2 a(uniform(rng, 0, 100), uniform(rng, 0, 100));
    lanes.push_back(line_lane(a, a + Vec2(uniform(rng, -30, 30), uniform(rng, -30, 30)), 4));
  }
  const VectorMap map = make_map(lanes);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec2 p(uniform(rng, 0, 100), uniform(rng, 0, 100));
    const double radius = uniform(rng, 1, 20);
    std::vector<LaneHit> expected;
    for (int l = 0; l < 50; ++l) {
      const double d = brute_distance(p, lanes[l]);
      if (d <= radius) expected.push_back({l, d});
    }
    std::stable_sort(expected.begin(), expected.end(),
                     [](const LaneHit& a, const LaneHit& b) { return a.distance < b.distance; });
    const auto hits = nearest_lanes(p, map, radius);
    REQUIRE(hits.size() == expected.size());
    for (std::size_t i = 0; i < hits.size(); ++i) {
      CHECK(hits[i].lane == expected[i].lane);
      CHECK(hits[i].distance == Approx(expected[i].distance));
    }
    CHECK(point_to_polyline_distance(p, lanes[0]) == Approx(brute_distance(p, lanes[0])));
  }
}
