#include "scenegen/frenet.hpp"

#include <algorithm>
#include <cmath>

namespace scenegen {

QuinticProfile quintic_coeffs(double d0, double d_target, double horizon) {
  if (!(horizon > 0.0)) {
    throw Error(ErrorCode::kNonPositiveHorizon, "horizon must be positive");
  }
  const double delta = d_target - d0;
  QuinticProfile p{d0, delta, horizon, 0.0, 0.0, 0.0};
  if (delta == 0.0) return p;

  // Terminal position, velocity and acceleration in (a3, a4, a5).
  const double T = horizon;
  const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
  Eigen::Matrix3d A;
  A << T3, T4, T5,
       3 * T2, 4 * T3, 5 * T4,
       6 * T, 12 * T2, 20 * T3;
  const Eigen::Vector3d a = A.fullPivLu().solve(Eigen::Vector3d(delta, 0.0, 0.0));
  p.a3 = a[0];
  p.a4 = a[1];
  p.a5 = a[2];
  return p;
}

std::vector<FrenetCoord> frenet_rollout(const QuinticProfile& profile, double s0,
                                        double v, double dt, int steps) {
  if (!(dt > 0.0) || steps < 1) {
    throw Error(ErrorCode::kInvalidConfig, "rollout needs dt > 0 and steps >= 1");
  }
  if (steps * dt > profile.horizon + 1e-9) {
    throw Error(ErrorCode::kHorizonExceeded, "steps * dt exceeds the profile horizon");
  }
  std::vector<FrenetCoord> out;
  out.reserve(steps);
  for (int i = 1; i <= steps; ++i) {
    const double h = i * dt;
    out.push_back({s0 + v * h, profile.value(h)});
  }
  return out;
}

int CandidateConfig::steps() const {
  return static_cast<int>(std::lround(horizon / dt));
}

CandidateSet generate_candidates(const AgentInit& init, const VectorMap& map,
                                 const CandidateConfig& config) {
  if (config.v_grid.empty() || config.d_grid.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "candidate grids must be non-empty");
  }
  const Vec2 pos = init.position();
  std::vector<LaneHit> hits = nearest_lanes(pos, map, config.lane_radius);
  if (hits.empty()) {
    throw Error(ErrorCode::kNoReferenceLane, "no lane within candidate radius");
  }
  std::sort(hits.begin(), hits.end(),
            [](const LaneHit& a, const LaneHit& b) { return a.lane < b.lane; });

  double max_abs_d = 0.0;
  for (double d : config.d_grid) max_abs_d = std::max(max_abs_d, std::abs(d));
  const double reject_above = config.lane_radius + max_abs_d;
  const int steps = config.steps();

  CandidateSet out;
  for (const LaneHit& hit : hits) {
    const Lane& lane = map.lanes[hit.lane];
    const FrenetCoord start = cart_to_frenet(pos, lane);
    for (double v : config.v_grid) {
      for (double d_target : config.d_grid) {
        const QuinticProfile profile =
            quintic_coeffs(start.d, d_target, config.horizon);
        const auto samples =
            frenet_rollout(profile, start.s, v, config.dt, steps);
        bool reject = false;
        for (const auto& fc : samples) reject |= std::abs(fc.d) > reject_above;
        if (reject) continue;
        Candidate c{v, d_target, hit.lane, Trajectory(steps + 1, 2)};
        c.xy.row(0) = frenet_to_cart(start, lane).transpose();
        for (int i = 0; i < steps; ++i) {
          c.xy.row(i + 1) = frenet_to_cart(samples[i], lane).transpose();
        }
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

Candidate straight_candidate(const AgentInit& init, const CandidateConfig& config) {
  const int steps = config.steps();
  Candidate c{init.v, 0.0, -1, Trajectory(steps + 1, 2)};
  const Vec2 dir(std::cos(init.theta), std::sin(init.theta));
  for (int i = 0; i <= steps; ++i) {
    c.xy.row(i) = (init.position() + init.v * i * config.dt * dir).transpose();
  }
  return c;
}

CandidateSet candidates_or_fallback(const AgentInit& init, const VectorMap& map,
                                    const CandidateConfig& config) {
  try {
    CandidateSet set = generate_candidates(init, map, config);
    if (!set.empty()) return set;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoReferenceLane) throw;
  }
  return {straight_candidate(init, config)};
}

}  // namespace scenegen
