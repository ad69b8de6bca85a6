#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "scenegen/metrics.hpp"

using namespace scenegen;
using namespace scenegen::testing;
using doctest::Approx;

namespace {

Histogram hist(std::vector<double> mass) {
  Histogram h;
  for (std::size_t b = 0; b <= mass.size(); ++b) h.edges.push_back(static_cast<double>(b));
  h.mass = std::move(mass);
  return h;
}

Histogram random_hist(std::mt19937_64& rng, int bins) {
  std::vector<double> m(bins);
  for (double& v : m) v = uniform(rng, 0, 1) < 0.3 ? 0.0 : uniform(rng, 0, 1);
  m[0] += 1e-3;
  double total = 0.0;
  for (double v : m) total += v;
  for (double& v : m) v /= total;
  return hist(m);
}

double brute_collisions(const std::vector<Trajectory>& trajs, const std::vector<int>& types,
                        const RadiusFn& radius) {
  const std::size_t n = trajs.size();
  int hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool hit = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      for (Eigen::Index h = 1; h < trajs[i].rows(); ++h) {
        const double dx = trajs[i](h, 0) - trajs[j](h, 0), dy = trajs[i](h, 1) - trajs[j](h, 1);
        if (std::sqrt(dx * dx + dy * dy) < radius(types[i]) + radius(types[j])) hit = true;
      }
    }
    hits += hit;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("initial collision examples") {
  const RadiusFn r = constant_radius(1.0);
  CHECK(collision_rate(std::vector<AgentInit>{{0, 0, 0, 0, 0}, {1.5, 0, 0, 0, 0}}, r) == 1.0);
  CHECK(collision_rate(std::vector<AgentInit>{{0, 0, 0, 0, 0}, {2.5, 0, 0, 0, 0}}, r) == 0.0);
  CHECK(collision_rate(std::vector<AgentInit>{{0, 0, 0, 0, 0}, {1, 0, 0, 0, 0}, {9, 0, 0, 0, 0}}, r) ==
        Approx(2.0 / 3.0));
}

TEST_CASE("trajectory collisions match brute force") {
  std::mt19937_64 rng(31);
  const RadiusFn radius = [](int type) { return type == 0 ? 1.0 : 0.4; };
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Trajectory> trajs;
    std::vector<int> types;
    for (int i = 0; i < 10; ++i) {
      Trajectory t(21, 2);
      t.row(0) << uniform(rng, 0, 30), uniform(rng, 0, 30);
      const Eigen::RowVector2d v(uniform(rng, -1, 1), uniform(rng, -1, 1));
      for (int h = 1; h < 21; ++h) t.row(h) = t.row(h - 1) + v;
      trajs.push_back(t);
      types.push_back(i % 3 == 0 ? 1 : 0);
    }
    const double rate = collision_rate(trajs, types, radius);
    CHECK(rate == brute_collisions(trajs, types, radius));

    std::vector<int> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Trajectory> shuffled;
    std::vector<int> shuffled_types;
    for (int k : perm) {
      shuffled.push_back(trajs[k]);
      shuffled_types.push_back(types[k]);
    }
    CHECK(collision_rate(shuffled, shuffled_types, radius) == rate);
  }
}

TEST_CASE("collision rate ignores the initial row of trajectories") {
  Trajectory a(2, 2), b(2, 2);
  a << 0, 0, 0, 0;
  b << 0.5, 0, 10, 0;
  CHECK(collision_rate({a, b}, {0, 0}, constant_radius(1.0)) == 0.0);
  CHECK_THROWS_AS(collision_rate({a, b}, {0}, constant_radius(1.0)), Error);
}

TEST_CASE("offroad and near-edge examples") {
  const VectorMap map = make_map({line_lane({-100, 0}, {100, 0})});
  const std::vector<AgentInit> on = {{3, 0, 0, 1, 0}};
  CHECK(road_distance({3, 0}, map) == 0.0);
  CHECK(offroad_rate(on, map) == 0.0);
  CHECK(offroad_rate(std::vector<AgentInit>{{3, 5, 0, 1, 0}}, map) == 1.0);

  const std::vector<AgentInit> mixed = {{0, 0, 0, 1, 0}, {1, 2, 0, 1, 0}, {2, -5, 0, 1, 0}, {3, 6, 0, 1, 0}};
  CHECK(offroad_rate(mixed, map) == 0.5);
  CHECK(near_edge(mixed, map) == Approx(3.25));

  // Agent 5 m from two centerlines.
  const VectorMap two = make_map({line_lane({-100, 0}, {100, 0}), line_lane({-100, 10}, {100, 10})});
  CHECK(offroad_rate(std::vector<AgentInit>{{0, 5, 0, 1, 0}}, two) == 1.0);

  Trajectory wander(4, 2), stay(4, 2);
  wander << 0, 9, 1, 0, 2, 4.5, 3, 0;
  stay << 0, 0, 1, 1, 2, 3.9, 3, 0;
  CHECK(offroad_rate(std::vector<Trajectory>{wander, stay}, map) == 0.5);
}

TEST_CASE("jsd examples") {
  CHECK(jsd(hist({0.2, 0.3, 0.5}), hist({0.2, 0.3, 0.5})) == 0.0);
  CHECK(jsd(hist({1, 0}), hist({0, 1})) == Approx(1.0));
  // 0.5 * [0.5 log2(0.5/0.75) + 0.5 log2(0.5/0.25)] + 0.5 * [1 log2(1/0.75)]
  const double expect = 0.5 * (0.5 * std::log2(0.5 / 0.75) + 0.5 * std::log2(2.0)) +
                        0.5 * std::log2(1.0 / 0.75);
  CHECK(jsd(hist({0.5, 0.5}), hist({1, 0})) == Approx(expect));
  CHECK(jsd(hist({0.5, 0.5}), hist({1, 0})) == Approx(0.3113).epsilon(1e-3));

  Histogram shifted = hist({0.5, 0.5});
  shifted.edges[1] = 1.5;
  try {
    jsd(hist({0.5, 0.5}), shifted);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEdgeMismatch);
  }
}

TEST_CASE("jsd is symmetric and bounded") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const Histogram p = random_hist(rng, 12), q = random_hist(rng, 12);
    const double a = jsd(p, q);
    CHECK(a == jsd(q, p));
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    CHECK(a > 0.0);
    CHECK(jsd(p, p) == 0.0);
  }
}

TEST_CASE("histogram binning") {
  const Histogram h = make_histogram({-1.0, 0.1, 0.6, 0.9, 7.0}, 0.0, 1.0, 2);
  REQUIRE(h.edges.size() == 3);
  CHECK(h.edges[1] == 0.5);
  CHECK(h.mass[0] == Approx(0.4));
  CHECK(h.mass[1] == Approx(0.6));
  CHECK_THROWS_AS(make_histogram({}, 1.0, 1.0, 4), Error);
}

TEST_CASE("behavioral statistics on a seven-agent scene") {
  // Diagonal lane y = x; agents on the x axis at gaps 1..6.
  const VectorMap map = make_map({line_lane({-20, -20}, {40, 40})});
  const double pi = std::numbers::pi;
  const std::vector<double> xs = {0, 1, 3, 6, 10, 15, 21};
  const std::vector<double> thetas = {0, pi / 4, pi, -pi / 2, 3.0, pi / 4 + 0.1, -3 * pi / 4};
  std::vector<AgentInit> agents;
  for (int i = 0; i < 7; ++i) agents.push_back({xs[i], 0.0, thetas[i], static_cast<double>(i), 0});

  const std::vector<double> near = {1, 1, 2, 3, 4, 5, 6};
  const std::vector<double> density = {35.0 / 5, 31.0 / 5, 27.0 / 5, 27.0 / 5, 35.0 / 5, 46.0 / 5, 70.0 / 5};
  const std::vector<double> ang = {pi / 4, 0.0, 3 * pi / 4, 3 * pi / 4, 3.0 - pi / 4, 0.1, pi};

  const BehaviorSamples s = behavioral_samples(agents, map);
  for (int i = 0; i < 7; ++i) {
    CAPTURE(i);
    CHECK(s.values.at("near_dist")[i] == Approx(near[i]));
    CHECK(s.values.at("local_density")[i] == Approx(density[i]));
    CHECK(s.values.at("lat_dev")[i] == Approx(xs[i] / std::sqrt(2.0)));
    CHECK(s.values.at("ang_dev")[i] == Approx(ang[i]));
    CHECK(s.values.at("speed")[i] == static_cast<double>(i));
  }

  const auto hists = behavioral_histograms(agents, map, HistogramConfig{});
  CHECK(hists.size() == 5);
  agents.resize(5);
  const auto fewer = behavioral_histograms(agents, map, HistogramConfig{});
  CHECK(fewer.count("local_density") == 0);
  CHECK(fewer.count("near_dist") == 1);
}

TEST_CASE("two agents three metres apart") {
  const VectorMap map = make_map({line_lane({-10, 0}, {10, 0})});
  const BehaviorSamples s = behavioral_samples({{0, 0, 0, 1, 0}, {3, 0, 0, 1, 0}}, map);
  CHECK(s.values.at("near_dist") == std::vector<double>{3.0, 3.0});
  CHECK(s.values.at("ang_dev") == std::vector<double>{0.0, 0.0});
}

TEST_CASE("lateral deviation examples") {
  const VectorMap map = make_map({line_lane({-10, 0}, {200, 0})});
  const std::vector<AgentInit> init = {{0, 0, 0, 1, 0}};
  Trajectory center(61, 2), offset(61, 2), drift(61, 2);
  for (int h = 0; h <= 60; ++h) {
    center.row(h) << h, 0;
    offset.row(h) << h, 1;
    drift.row(h) << h, 2.0 * h / 60;
  }
  LateralDeviation d = lateral_deviation({center}, map, init);
  CHECK(d.avg == 0.0);
  CHECK(d.final == 0.0);
  d = lateral_deviation({offset}, map, init);
  CHECK(d.avg == Approx(1.0));
  CHECK(d.final == Approx(1.0));
  d = lateral_deviation({drift}, map, init);
  double mean = 0.0;
  for (int h = 1; h <= 60; ++h) mean += 2.0 * h / 60 / 60;
  CHECK(d.avg == Approx(mean));
  CHECK(d.avg == Approx(1.0167).epsilon(1e-4));
  CHECK(d.final == Approx(2.0));

  try {
    lateral_deviation({center}, VectorMap{}, init);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoReferenceLane);
  }
}

TEST_CASE("displacement errors") {
  std::mt19937_64 rng(33);
  std::vector<Trajectory> gt;
  for (int i = 0; i < 3; ++i) gt.push_back(Eigen::MatrixXd::Random(11, 2) * 10);
  DisplacementErrors e = ade_fde_mr(gt, gt);
  CHECK(e.ade == 0.0);
  CHECK(e.fde == 0.0);
  CHECK(e.mr == 0.0);

  std::vector<Trajectory> shifted = gt;
  for (auto& t : shifted) t.col(1).array() += 1.0;
  e = ade_fde_mr(shifted, gt);
  CHECK(e.ade == Approx(1.0));
  CHECK(e.fde == Approx(1.0));
  CHECK(e.mr == 0.0);

  std::vector<Trajectory> two = {gt[0], gt[1]}, pred = two;
  pred[0].bottomRows(1).col(0).array() += 2.5;
  pred[1].bottomRows(1).col(0).array() += 0.5;
  e = ade_fde_mr(pred, two);
  CHECK(e.mr == 0.5);
  CHECK(e.fde == Approx(1.5));

  // Exactly 2 m is not a miss.
  pred[0] = two[0];
  pred[0].bottomRows(1).col(0).array() += 2.0;
  CHECK(ade_fde_mr(pred, two).mr == 0.0);

  try {
    ade_fde_mr({gt[0]}, {gt[0].topRows(5)});
    FAIL("expected an error");
  } catch (const Error& e2) {
    CHECK(e2.code() == ErrorCode::kShapeMismatch);
  }
}

TEST_CASE("metric report lookup") {
  MetricReport r;
  r.values["ade"] = 0.25;
  CHECK(r.get("ade").value() == 0.25);
  CHECK(!r.get("fde").has_value());
}
