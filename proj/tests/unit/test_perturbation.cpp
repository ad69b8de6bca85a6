#include <doctest.h>

#include <limits>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "scenegen/frenet.hpp"
#include "scenegen/perturbation.hpp"

using namespace scenegen;
using namespace scenegen::testing;
using doctest::Approx;

namespace {

Perturbation turn(double pivot, double curvature) {
  Perturbation p;
  p.kind = PerturbKind::kTurn;
  p.pivot_s = pivot;
  p.curvature = curvature;
  return p;
}

void check_invalid(const Perturbation& p) {
  try {
    validate_perturbation(p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidPerturbation);
  }
}

void check_lane_sanity(const Lane& lane) {
  for (int k = 1; k < lane.size(); ++k) CHECK((lane.point(k) - lane.point(k - 1)).norm() > 1e-9);
}

}  // namespace

TEST_CASE("identity leaves the map bit-for-bit unchanged") {
  const VectorMap map = make_map({arc_lane({0, 0}, 30, 0, 1.3, 25), line_lane({0, 5}, {40, 8}, 6)});
  const VectorMap out = perturb_map(map, Perturbation{});
  REQUIRE(out.lanes.size() == 2);
  for (int l = 0; l < 2; ++l) {
    CHECK((out.lanes[l].points.array() == map.lanes[l].points.array()).all());
    CHECK(out.lanes[l].cum_s == map.lanes[l].cum_s);
  }
}

TEST_CASE("zero-curvature turn keeps the map") {
  const VectorMap map = make_map({arc_lane({0, 0}, 30, 0, 1.3, 25), line_lane({0, 5}, {40, 8}, 6)});
  const VectorMap out = perturb_map(map, turn(10, 0.0));
  for (int l = 0; l < 2; ++l) {
    REQUIRE(out.lanes[l].size() == map.lanes[l].size());
    CHECK((out.lanes[l].points - map.lanes[l].points).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("turn bends a straight lane into a circular arc") {
  const VectorMap map = make_map({line_lane({0, 0}, {100, 0})});
  const VectorMap out = perturb_map(map, turn(50, 0.02));
  const Lane& lane = out.lanes[0];
  // Heading k (u - 50) beyond the pivot: a radius-50 arc sweeping one radian.
  const Vec2 end(50 + 50 * std::sin(1.0), 50 * (1 - std::cos(1.0)));
  CHECK((lane.point(lane.size() - 1) - end).norm() < 1e-3);
  CHECK(std::abs(lane.length() - 100.0) < 1.0);
  for (int k = 0; k < lane.size(); ++k) {
    const Vec2 p = lane.point(k);
    if (p.x() <= 50.0) {
      CHECK(std::abs(p.y()) < 1e-12);
    } else {
      CHECK(std::abs((p - Vec2(50, 50)).norm() - 50.0) < 1e-6);
    }
  }
  check_lane_sanity(lane);

  Scene scene;
  scene.agents = {{60, 0, 0.1, 5, 0}, {20, -1, 0, 3, 0}};
  const Scene moved = remap_agents(scene, map, out);
  const Vec2 expect(50 + 50 * std::sin(0.2), 50 * (1 - std::cos(0.2)));
  CHECK((moved.agents[0].position() - expect).norm() < 1e-3);
  // Polyline headings lag the arc by half a resampling step.
  CHECK(std::abs(moved.agents[0].theta - 0.3) < 0.011);
  CHECK((moved.agents[1].position() - Vec2(20, -1)).norm() < 1e-2);
}

TEST_CASE("double turn returns to the original heading") {
  const VectorMap map = make_map({line_lane({0, 0}, {100, 0})});
  Perturbation p = turn(20, 0.01);
  p.kind = PerturbKind::kDoubleTurn;
  const VectorMap out = perturb_map(map, p);
  const Lane& lane = out.lanes[0];
  const double phi = 0.4;
  const Vec2 end(20 + 2 * std::sin(phi) / 0.01, 2 * (1 - std::cos(phi)) / 0.01);
  CHECK((lane.point(lane.size() - 1) - end).norm() < 1e-3);
  CHECK(std::abs(lane.heading[lane.size() - 2]) < 0.02);
  CHECK(std::abs(lane.length() - 100.0) < 1.0);
  check_lane_sanity(lane);

  p.pivot2_s = 40;
  const VectorMap early_map = perturb_map(map, p);
  const Lane& early = early_map.lanes[0];
  // Turns back from s = 40: heading 0.2 then decreasing by 0.6 over the last 60 m.
  CHECK(early.heading[early.size() - 2] == Approx(-0.4).epsilon(0.05));
}

TEST_CASE("ripple displaces laterally") {
  const VectorMap map = make_map({line_lane({0, 0}, {60, 0})});
  Perturbation p;
  p.kind = PerturbKind::kRipple;
  p.pivot_s = 10;
  p.amplitude = 1.5;
  p.wavelength = 20;
  const VectorMap out = perturb_map(map, p);
  const Lane& lane = out.lanes[0];
  for (int k = 0; k < lane.size(); ++k) {
    const Vec2 q = lane.point(k);
    const double expect = q.x() <= 10 ? 0.0 : 1.5 * std::sin(2 * std::numbers::pi * (q.x() - 10) / 20);
    CHECK(std::abs(q.y() - expect) < 1e-9);
  }
  check_lane_sanity(lane);
}

TEST_CASE("arc length is preserved on curved lanes") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const double r = uniform(rng, 15, 60);
    const Lane lane = arc_lane({0, 0}, r, uniform(rng, -3, 3), uniform(rng, -3, 3), 40);
    const VectorMap map = make_map({lane});
    Perturbation p = turn(uniform(rng, 0, lane.length()), uniform(rng, -0.05, 0.05));
    if (trial % 2) p.kind = PerturbKind::kDoubleTurn;
    const VectorMap bent = perturb_map(map, p);
    const Lane& out = bent.lanes[0];
    CHECK(std::abs(out.length() - lane.length()) < 0.01 * lane.length());
    check_lane_sanity(out);
  }
}

TEST_CASE("remapping preserves Frenet coordinates and angular deviation") {
  std::mt19937_64 rng(42);
  const VectorMap map = make_map({line_lane({0, 0}, {120, 0}), line_lane({0, 6}, {120, 6})});
  const VectorMap bent = perturb_map(map, turn(30, -0.015));
  Scene scene;
  for (int i = 0; i < 20; ++i) {
    scene.agents.push_back({uniform(rng, 0, 110), uniform(rng, -1.5, 7.5), uniform(rng, -0.5, 0.5), 4, 0});
  }
  const Scene moved = remap_agents(scene, map, bent);
  for (std::size_t i = 0; i < scene.agents.size(); ++i) {
    const AgentInit& a = scene.agents[i];
    const AgentInit& b = moved.agents[i];
    const int lane = a.y < 3 ? 0 : 1;
    const FrenetCoord before = cart_to_frenet(a.position(), map.lanes[lane]);
    const FrenetCoord after = cart_to_frenet(b.position(), bent.lanes[lane]);
    CHECK(std::abs(after.s - before.s) < 1e-3);
    CHECK(std::abs(after.d - before.d) < 1e-3);
    const double dev_before = wrap_angle(a.theta - heading_at(map.lanes[lane], before.s));
    const double dev_after = wrap_angle(b.theta - heading_at(bent.lanes[lane], after.s));
    CHECK(std::abs(dev_after - dev_before) < 1e-6);
    CHECK(b.v == a.v);
  }
  const Scene same = remap_agents(scene, map, perturb_map(map, Perturbation{}));
  for (std::size_t i = 0; i < scene.agents.size(); ++i) {
    CHECK((same.agents[i].position() - scene.agents[i].position()).norm() < 1e-9);
    CHECK(std::abs(same.agents[i].theta - scene.agents[i].theta) < 1e-9);
  }
}

TEST_CASE("candidates follow the perturbed lanes") {
  const VectorMap map = make_map({line_lane({0, 0}, {150, 0})});
  const VectorMap bent = perturb_map(map, turn(20, 0.02));
  Scene scene;
  scene.agents = {{25, 0.5, 0.05, 6, 0}};
  const AgentInit a = remap_agents(scene, map, bent).agents[0];
  const CandidateConfig cfg;
  const CandidateSet set = generate_candidates(a, bent, cfg);
  REQUIRE(set.size() == cfg.v_grid.size() * cfg.d_grid.size());
  for (const Candidate& c : set) {
    CHECK((c.xy.row(0).transpose() - a.position()).norm() < 1e-6);
    const FrenetCoord end = cart_to_frenet(c.xy.bottomRows(1).transpose(), bent.lanes[0]);
    CHECK(std::abs(end.d - c.d) < 1e-6);
  }
}

TEST_CASE("invalid perturbations") {
  check_invalid(turn(0, std::numeric_limits<double>::quiet_NaN()));
  Perturbation ripple;
  ripple.kind = PerturbKind::kRipple;
  ripple.wavelength = 0.0;
  check_invalid(ripple);
  Perturbation dbl = turn(50, 0.01);
  dbl.kind = PerturbKind::kDoubleTurn;
  dbl.pivot2_s = 10;
  check_invalid(dbl);
  Perturbation spacing = turn(0, 0.01);
  spacing.spacing = 0.0;
  check_invalid(spacing);
  CHECK_THROWS_AS(perturb_map(make_map({line_lane({0, 0}, {10, 0})}), dbl), Error);
  try {
    parse_perturb_kind("twist");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidPerturbation);
  }
  for (PerturbKind k : {PerturbKind::kIdentity, PerturbKind::kTurn, PerturbKind::kDoubleTurn, PerturbKind::kRipple}) {
    CHECK(parse_perturb_kind(perturb_kind_name(k)) == k);
  }
}

TEST_CASE("remapping without reference lanes fails") {
  Scene scene;
  scene.agents = {{0, 0, 0, 1, 0}};
  try {
    remap_agents(scene, VectorMap{}, VectorMap{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoReferenceLane);
  }
}
