#ifndef SCENEGEN_TESTS_HELPERS_HPP_
#define SCENEGEN_TESTS_HELPERS_HPP_

#include <cmath>
#include <numbers>
#include <random>

#include "scenegen/geometry.hpp"

namespace scenegen::testing {

inline Lane line_lane(Vec2 a, Vec2 b, int points = 2) {
  Points2 pts(points, 2);
  for (int k = 0; k < points; ++k) {
    pts.row(k) = (a + (b - a) * (static_cast<double>(k) / (points - 1))).transpose();
  }
  return arclength_parameterize(pts);
}

// Counter-clockwise arc around `center` from angle a0 to a1.
inline Lane arc_lane(Vec2 center, double radius, double a0, double a1, int points) {
  Points2 pts(points, 2);
  for (int k = 0; k < points; ++k) {
    const double a = a0 + (a1 - a0) * k / (points - 1);
    pts.row(k) << center.x() + radius * std::cos(a), center.y() + radius * std::sin(a);
  }
  return arclength_parameterize(pts);
}

inline VectorMap make_map(std::vector<Lane> lanes) {
  VectorMap m;
  m.lanes = std::move(lanes);
  m.bounds = lane_bounds(m.lanes);
  return m;
}

inline Vec2 rotate(const Vec2& p, double angle) {
  return {std::cos(angle) * p.x() - std::sin(angle) * p.y(),
          std::sin(angle) * p.x() + std::cos(angle) * p.y()};
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace scenegen::testing

#endif  // SCENEGEN_TESTS_HELPERS_HPP_
