#ifndef SCENEGEN_FRENET_HPP_
#define SCENEGEN_FRENET_HPP_

#include <vector>

#include "scenegen/geometry.hpp"
#include "scenegen/types.hpp"

namespace scenegen {

// Lateral profile d(h) = d0 + a3 h^3 + a4 h^4 + a5 h^5 with zero lateral
// velocity and acceleration at both ends.
struct QuinticProfile {
  double d0 = 0.0;
  double delta_d = 0.0;
  double horizon = 0.0;
  double a3 = 0.0;
  double a4 = 0.0;
  double a5 = 0.0;

  double value(double h) const { return d0 + h * h * h * (a3 + h * (a4 + h * a5)); }
  double velocity(double h) const { return h * h * (3 * a3 + h * (4 * a4 + h * 5 * a5)); }
  double acceleration(double h) const { return h * (6 * a3 + h * (12 * a4 + h * 20 * a5)); }
};

QuinticProfile quintic_coeffs(double d0, double d_target, double horizon);

// Samples (s0 + v h, d(h)) at h = dt, 2 dt, ..., steps * dt.
std::vector<FrenetCoord> frenet_rollout(const QuinticProfile& profile, double s0,
                                        double v, double dt, int steps);

struct CandidateConfig {
  std::vector<double> v_grid{0.0, 2.0, 4.0, 8.0, 12.0};
  std::vector<double> d_grid{-3.0, 0.0, 3.0};
  double horizon = 6.0;
  double dt = 0.1;
  double lane_radius = 5.0;

  int steps() const;
};

struct Candidate {
  double v = 0.0;
  double d = 0.0;
  int lane = -1;  // -1 marks the straight-line fallback
  Trajectory xy;  // (steps + 1) x 2, row 0 at the agent's position
};

using CandidateSet = std::vector<Candidate>;

// Candidates for one agent over every reference lane within lane_radius,
// ordered by lane index, then v index, then d index. Throws kNoReferenceLane
// when no lane is in range.
CandidateSet generate_candidates(const AgentInit& init, const VectorMap& map,
                                 const CandidateConfig& config);

// Constant-velocity straight line along the agent heading at its own speed.
Candidate straight_candidate(const AgentInit& init, const CandidateConfig& config);

// generate_candidates, falling back to straight_candidate when no lane is near.
CandidateSet candidates_or_fallback(const AgentInit& init, const VectorMap& map,
                                    const CandidateConfig& config);

}  // namespace scenegen

#endif  // SCENEGEN_FRENET_HPP_
