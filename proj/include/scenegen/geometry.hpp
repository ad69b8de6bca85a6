#ifndef SCENEGEN_GEOMETRY_HPP_
#define SCENEGEN_GEOMETRY_HPP_

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "scenegen/types.hpp"

namespace scenegen {

struct Lane {
  Points2 points;
  Eigen::VectorXd cum_s;
  Eigen::VectorXd heading;
  Eigen::VectorXd curvature;

  int size() const { return static_cast<int>(points.rows()); }
  double length() const { return cum_s[cum_s.size() - 1]; }
  Vec2 point(int k) const { return points.row(k).transpose(); }
};

struct Bounds {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  bool contains(const Vec2& p, double tol = 1e-9) const {
    return p.x() >= xmin - tol && p.x() <= xmax + tol && p.y() >= ymin - tol &&
           p.y() <= ymax + tol;
  }
};

struct VectorMap {
  std::vector<Lane> lanes;
  Bounds bounds;
};

// Signed offset d is positive to the left of the travel direction.
struct FrenetCoord {
  double s = 0.0;
  double d = 0.0;
};

struct LaneHit {
  int lane = 0;
  double distance = 0.0;
};

// Builds cumulative arc length, forward-difference headings and three-point
// curvature. Throws kDegenerateLane on fewer than 2 points or repeated points.
Lane arclength_parameterize(const Points2& points);

// Smallest bounding rectangle of all lane points.
Bounds lane_bounds(const std::vector<Lane>& lanes);

// Checks the VectorMap invariants; throws kDegenerateLane on violation.
void validate_map(const VectorMap& map);

/// Heading at arc length s, linearly interpolated between vertex headings.
/// Outside [0, length] the end headings are held constant.
double heading_at(const Lane& lane, double s);

/// Centerline position at arc length s; extrapolates along end headings.
Vec2 centerline_at(const Lane& lane, double s);

/// Projects p into the lane's Frenet frame.
///
/// The frame is c(s) + d * n(s), where c is the polyline and n the left normal
/// of heading_at(s). The returned s is the foot of that frame closest to p,
/// clamped to [0, length]; ties resolve to the smallest s. On straight
/// segments this is the ordinary orthogonal projection.
FrenetCoord cart_to_frenet(const Vec2& p, const Lane& lane);

Vec2 frenet_to_cart(const FrenetCoord& fc, const Lane& lane);

// Euclidean distance from p to the closest point on the polyline.
double point_to_polyline_distance(const Vec2& p, const Lane& lane);

// Lanes within `radius` of p, ascending by distance, ties by lane index.
std::vector<LaneHit> nearest_lanes(const Vec2& p, const VectorMap& map,
                                   double radius);

// Index of the closest lane (ties by index). Map must have at least one lane.
LaneHit nearest_lane(const Vec2& p, const VectorMap& map);

}  // namespace scenegen

#endif  // SCENEGEN_GEOMETRY_HPP_
