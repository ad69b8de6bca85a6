#include "scenegen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace scenegen {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateLane: return "DegenerateLane";
    case ErrorCode::kNonPositiveHorizon: return "NonPositiveHorizon";
    case ErrorCode::kHorizonExceeded: return "HorizonExceeded";
    case ErrorCode::kNoReferenceLane: return "NoReferenceLane";
    case ErrorCode::kInvalidScheduleParams: return "InvalidScheduleParams";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyCandidates: return "EmptyCandidates";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kModelNotFitted: return "ModelNotFitted";
    case ErrorCode::kGraphNotRecorded: return "GraphNotRecorded";
    case ErrorCode::kEdgeMismatch: return "EdgeMismatch";
    case ErrorCode::kInvalidPerturbation: return "InvalidPerturbation";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kEmptyScene: return "EmptyScene";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kNumeric: return "NumericFailure";
  }
  return "Unknown";
}

namespace {

Vec2 direction(double heading) { return {std::cos(heading), std::sin(heading)}; }
Vec2 left_normal(double heading) { return {-std::sin(heading), std::cos(heading)}; }

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Segment index k such that cum_s[k] <= s < cum_s[k+1], clamped to valid range.
int segment_at(const Lane& lane, double s) {
  const auto* begin = lane.cum_s.data();
  const auto* end = begin + lane.cum_s.size();
  int k = static_cast<int>(std::upper_bound(begin, end, s) - begin) - 1;
  return std::clamp(k, 0, lane.size() - 2);
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double u = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + u * ab)).norm();
}

}  // namespace

Lane arclength_parameterize(const Points2& points) {
  const int n = static_cast<int>(points.rows());
  if (n < 2) {
    throw Error(ErrorCode::kDegenerateLane, "lane needs at least 2 points");
  }
  Lane lane;
  lane.points = points;
  lane.cum_s.resize(n);
  lane.heading.resize(n);
  lane.curvature.setZero(n);
  lane.cum_s[0] = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    const Vec2 seg = (points.row(k + 1) - points.row(k)).transpose();
    const double len = seg.norm();
    if (!(len > 0.0) || !std::isfinite(len)) {
      throw Error(ErrorCode::kDegenerateLane,
                  "duplicate or non-finite consecutive points at index " +
                      std::to_string(k));
    }
    lane.cum_s[k + 1] = lane.cum_s[k] + len;
    lane.heading[k] = std::atan2(seg.y(), seg.x());
  }
  lane.heading[n - 1] = lane.heading[n - 2];

  // Signed curvature of the circle through three consecutive points.
  for (int k = 1; k + 1 < n; ++k) {
    const Vec2 a = lane.point(k - 1);
    const Vec2 b = lane.point(k);
    const Vec2 c = lane.point(k + 1);
    const double denom = (b - a).norm() * (c - b).norm() * (c - a).norm();
    lane.curvature[k] = denom > 0.0 ? 2.0 * cross(b - a, c - b) / denom : 0.0;
  }
  if (n >= 3) {
    lane.curvature[0] = lane.curvature[1];
    lane.curvature[n - 1] = lane.curvature[n - 2];
  }
  return lane;
}

Bounds lane_bounds(const std::vector<Lane>& lanes) {
  Bounds b{std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};
  for (const auto& lane : lanes) {
    b.xmin = std::min(b.xmin, lane.points.col(0).minCoeff());
    b.ymin = std::min(b.ymin, lane.points.col(1).minCoeff());
    b.xmax = std::max(b.xmax, lane.points.col(0).maxCoeff());
    b.ymax = std::max(b.ymax, lane.points.col(1).maxCoeff());
  }
  return b;
}

void validate_map(const VectorMap& map) {
  for (std::size_t i = 0; i < map.lanes.size(); ++i) {
    const Lane& lane = map.lanes[i];
    if (lane.size() < 2) {
      throw Error(ErrorCode::kDegenerateLane, "lane " + std::to_string(i) +
                                                  " has fewer than 2 points");
    }
    for (int k = 0; k < lane.size(); ++k) {
      if (!map.bounds.contains(lane.point(k), 1e-6)) {
        throw Error(ErrorCode::kDegenerateLane,
                    "lane " + std::to_string(i) + " leaves the map bounds");
      }
    }
  }
}

double heading_at(const Lane& lane, double s) {
  if (s <= 0.0) return lane.heading[0];
  if (s >= lane.length()) return lane.heading[lane.size() - 1];
  const int k = segment_at(lane, s);
  const double u = (s - lane.cum_s[k]) / (lane.cum_s[k + 1] - lane.cum_s[k]);
  const double delta = wrap_angle(lane.heading[k + 1] - lane.heading[k]);
  return wrap_angle(lane.heading[k] + u * delta);
}

Vec2 centerline_at(const Lane& lane, double s) {
  if (s <= 0.0) return lane.point(0) + s * direction(lane.heading[0]);
  const double total = lane.length();
  if (s >= total) {
    return lane.point(lane.size() - 1) +
           (s - total) * direction(lane.heading[lane.size() - 1]);
  }
  const int k = segment_at(lane, s);
  const double u = (s - lane.cum_s[k]) / (lane.cum_s[k + 1] - lane.cum_s[k]);
  return (1.0 - u) * lane.point(k) + u * lane.point(k + 1);
}

Vec2 frenet_to_cart(const FrenetCoord& fc, const Lane& lane) {
  return centerline_at(lane, fc.s) + fc.d * left_normal(heading_at(lane, fc.s));
}

FrenetCoord cart_to_frenet(const Vec2& p, const Lane& lane) {
  const int n_seg = lane.size() - 1;
  double best_dist = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  auto consider = [&](double s) {
    const double dist = (p - centerline_at(lane, s)).norm();
    if (dist < best_dist - 1e-12 ||
        (std::abs(dist - best_dist) <= 1e-12 && s < best_s)) {
      best_dist = dist;
      best_s = s;
    }
  };
  consider(0.0);
  consider(lane.length());

  std::vector<double> seg_dist(n_seg);
  for (int k = 0; k < n_seg; ++k) {
    seg_dist[k] = segment_distance(p, lane.point(k), lane.point(k + 1));
  }
  std::vector<int> order(n_seg);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return seg_dist[a] < seg_dist[b]; });

  for (int k : order) {
    // A frame foot on segment k is never closer than the segment itself.
    if (seg_dist[k] > best_dist + 1e-9) break;
    const Vec2 a = lane.point(k);
    const double len = lane.cum_s[k + 1] - lane.cum_s[k];
    const Vec2 e = (lane.point(k + 1) - a) / len;
    const double theta = lane.heading[k];
    const double delta = wrap_angle(lane.heading[k + 1] - lane.heading[k]);
    if (delta == 0.0) {
      const double u = (p - a).dot(e);
      if (u >= 0.0 && u <= len) consider(lane.cum_s[k] + u);
      continue;
    }
    // Tangential residual of the frame; its roots are the frame feet.
    auto f = [&](double u) {
      return (p - a - u * e).dot(direction(theta + delta * u / len));
    };
    constexpr int kPieces = 4;
    double u0 = 0.0;
    double f0 = f(u0);
    if (f0 == 0.0) consider(lane.cum_s[k]);
    for (int piece = 1; piece <= kPieces; ++piece) {
      const double u1 = len * piece / kPieces;
      const double f1 = f(u1);
      if (f1 == 0.0) {
        consider(lane.cum_s[k] + u1);
      } else if ((f0 < 0.0) != (f1 < 0.0) && f0 != 0.0) {
        double lo = u0, hi = u1, flo = f0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * len; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = f(mid);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        consider(lane.cum_s[k] + 0.5 * (lo + hi));
      }
      u0 = u1;
      f0 = f1;
    }
  }
  const Vec2 offset = p - centerline_at(lane, best_s);
  return {best_s, offset.dot(left_normal(heading_at(lane, best_s)))};
}

double point_to_polyline_distance(const Vec2& p, const Lane& lane) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < lane.size(); ++k) {
    best = std::min(best, segment_distance(p, lane.point(k), lane.point(k + 1)));
  }
  return best;
}

std::vector<LaneHit> nearest_lanes(const Vec2& p, const VectorMap& map,
                                   double radius) {
  std::vector<LaneHit> hits;
  if (!(radius > 0.0)) return hits;
  for (std::size_t i = 0; i < map.lanes.size(); ++i) {
    const double dist = point_to_polyline_distance(p, map.lanes[i]);
    if (dist <= radius) hits.push_back({static_cast<int>(i), dist});
  }
  std::stable_sort(hits.begin(), hits.end(), [](const LaneHit& a, const LaneHit& b) {
    return a.distance < b.distance;
  });
  return hits;
}

LaneHit nearest_lane(const Vec2& p, const VectorMap& map) {
  if (map.lanes.empty()) {
    throw Error(ErrorCode::kNoReferenceLane, "map has no lanes");
  }
  LaneHit best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < map.lanes.size(); ++i) {
    const double dist = point_to_polyline_distance(p, map.lanes[i]);
    if (dist < best.distance) best = {static_cast<int>(i), dist};
  }
  return best;
}

}  // namespace scenegen
