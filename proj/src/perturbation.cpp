#include "scenegen/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace scenegen {

PerturbKind parse_perturb_kind(const std::string& name) {
  if (name == "identity") return PerturbKind::kIdentity;
  if (name == "turn") return PerturbKind::kTurn;
  if (name == "double_turn") return PerturbKind::kDoubleTurn;
  if (name == "ripple") return PerturbKind::kRipple;
  throw Error(ErrorCode::kInvalidPerturbation, "unknown perturbation kind '" + name + "'");
}

const char* perturb_kind_name(PerturbKind kind) {
  switch (kind) {
    case PerturbKind::kIdentity: return "identity";
    case PerturbKind::kTurn: return "turn";
    case PerturbKind::kDoubleTurn: return "double_turn";
    case PerturbKind::kRipple: return "ripple";
  }
  return "identity";
}

void validate_perturbation(const Perturbation& p) {
  auto fail = [](const char* what) { throw Error(ErrorCode::kInvalidPerturbation, what); };
  if (!std::isfinite(p.pivot_s) || !std::isfinite(p.pivot2_s)) fail("pivot must be finite");
  if (!(p.spacing > 0.0) || !std::isfinite(p.spacing)) fail("spacing must be positive");
  switch (p.kind) {
    case PerturbKind::kIdentity:
      break;
    case PerturbKind::kTurn:
    case PerturbKind::kDoubleTurn:
      if (!std::isfinite(p.curvature)) fail("curvature must be finite");
      if (p.kind == PerturbKind::kDoubleTurn && p.pivot2_s >= 0.0 && p.pivot2_s < p.pivot_s) {
        fail("second pivot precedes the first");
      }
      break;
    case PerturbKind::kRipple:
      if (!std::isfinite(p.amplitude)) fail("amplitude must be finite");
      if (!(p.wavelength > 0.0) || !std::isfinite(p.wavelength)) {
        fail("wavelength must be positive");
      }
      break;
  }
}

namespace {

bool zero_strength(const Perturbation& p) {
  switch (p.kind) {
    case PerturbKind::kIdentity: return true;
    case PerturbKind::kTurn:
    case PerturbKind::kDoubleTurn: return p.curvature == 0.0;
    case PerturbKind::kRipple: return p.amplitude == 0.0;
  }
  return true;
}

// Heading offset phi(u) = offset + slope * (u - from) on one piece.
struct RotationPiece {
  double offset;
  double slope;
  double from;
};

RotationPiece rotation_at(const Perturbation& p, double pivot2, double u) {
  if (p.kind == PerturbKind::kDoubleTurn && u > pivot2) {
    return {p.curvature * (pivot2 - p.pivot_s), -p.curvature, pivot2};
  }
  return {0.0, p.curvature, p.pivot_s};
}

// Integral of the unit vector at angle alpha + phi(u) for u in [a, b].
Vec2 integrate_direction(double alpha, const RotationPiece& r, double a, double b) {
  const double ta = alpha + r.offset + r.slope * (a - r.from);
  const double tb = alpha + r.offset + r.slope * (b - r.from);
  if (std::abs(r.slope * (b - a)) < 1e-12) {
    return (b - a) * Vec2(std::cos(ta), std::sin(ta));
  }
  return Vec2(std::sin(tb) - std::sin(ta), std::cos(ta) - std::cos(tb)) / r.slope;
}

std::vector<double> stations_after(double pivot, double length, double spacing) {
  std::vector<double> st;
  for (int k = 0;; ++k) {
    const double s = pivot + k * spacing;
    if (s > length - 1e-6) break;
    st.push_back(s);
  }
  st.push_back(length);
  return st;
}

}  // namespace

Lane perturb_lane(const Lane& lane, const Perturbation& p) {
  validate_perturbation(p);
  const double length = lane.length();
  if (zero_strength(p) || p.pivot_s >= length) return lane;
  const double pivot = std::max(p.pivot_s, 0.0);
  const double pivot2 = p.pivot2_s >= 0.0 ? p.pivot2_s : 0.5 * (pivot + length);

  std::vector<Vec2> pts;
  for (int k = 0; k < lane.size() && lane.cum_s[k] < pivot - 1e-9; ++k) {
    pts.push_back(lane.point(k));
  }
  const std::vector<double> stations = stations_after(pivot, length, p.spacing);

  if (p.kind == PerturbKind::kRipple) {
    for (double s : stations) {
      const double d = p.amplitude * std::sin(2.0 * std::numbers::pi * (s - pivot) / p.wavelength);
      pts.push_back(frenet_to_cart({s, d}, lane));
    }
  } else {
    Perturbation q = p;
    q.pivot_s = pivot;
    std::vector<double> breaks(stations);
    for (int k = 0; k < lane.size(); ++k) {
      if (lane.cum_s[k] > pivot && lane.cum_s[k] < length) breaks.push_back(lane.cum_s[k]);
    }
    if (p.kind == PerturbKind::kDoubleTurn && pivot2 > pivot && pivot2 < length) {
      breaks.push_back(pivot2);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    Vec2 pos = centerline_at(lane, pivot);
    std::size_t next_station = 0;
    for (std::size_t b = 0; b < breaks.size(); ++b) {
      if (b > 0) {
        const double a = breaks[b - 1];
        const double mid = 0.5 * (a + breaks[b]);
        const int seg = static_cast<int>(
            std::upper_bound(lane.cum_s.data(), lane.cum_s.data() + lane.size(), mid) -
            lane.cum_s.data()) - 1;
        const double alpha = lane.heading[std::clamp(seg, 0, lane.size() - 2)];
        pos += integrate_direction(alpha, rotation_at(q, pivot2, mid), a, breaks[b]);
      }
      if (next_station < stations.size() && breaks[b] == stations[next_station]) {
        pts.push_back(pos);
        ++next_station;
      }
    }
  }

  Points2 out(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pts[i];
  return arclength_parameterize(out);
}

VectorMap perturb_map(const VectorMap& map, const Perturbation& p) {
  validate_perturbation(p);
  if (p.kind == PerturbKind::kIdentity) return map;
  VectorMap out;
  out.lanes.reserve(map.lanes.size());
  for (const Lane& lane : map.lanes) out.lanes.push_back(perturb_lane(lane, p));
  out.bounds = map.bounds;
  if (!out.lanes.empty()) {
    const Bounds lb = lane_bounds(out.lanes);
    out.bounds.xmin = std::min(out.bounds.xmin, lb.xmin);
    out.bounds.ymin = std::min(out.bounds.ymin, lb.ymin);
    out.bounds.xmax = std::max(out.bounds.xmax, lb.xmax);
    out.bounds.ymax = std::max(out.bounds.ymax, lb.ymax);
  }
  return out;
}

Scene remap_agents(const Scene& scene, const VectorMap& original, const VectorMap& perturbed) {
  if (original.lanes.size() != perturbed.lanes.size()) {
    throw Error(ErrorCode::kShapeMismatch, "perturbed map has a different lane count");
  }
  Scene out = scene;
  for (AgentInit& a : out.agents) {
    const int li = nearest_lane(a.position(), original).lane;
    const FrenetCoord fc = cart_to_frenet(a.position(), original.lanes[li]);
    const double dev = wrap_angle(a.theta - heading_at(original.lanes[li], fc.s));
    const Vec2 p = frenet_to_cart(fc, perturbed.lanes[li]);
    a.x = p.x();
    a.y = p.y();
    a.theta = wrap_angle(heading_at(perturbed.lanes[li], fc.s) + dev);
  }
  return out;
}

}  // namespace scenegen
