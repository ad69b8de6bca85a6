#ifndef SCENEGEN_PERTURBATION_HPP_
#define SCENEGEN_PERTURBATION_HPP_

#include <string>

#include "scenegen/geometry.hpp"
#include "scenegen/types.hpp"

namespace scenegen {

enum class PerturbKind { kIdentity, kTurn, kDoubleTurn, kRipple };

PerturbKind parse_perturb_kind(const std::string& name);
const char* perturb_kind_name(PerturbKind kind);

struct Perturbation {
  PerturbKind kind = PerturbKind::kIdentity;
  double pivot_s = 0.0;
  double pivot2_s = -1.0;  // double_turn only; negative means midway to the lane end
  double curvature = 0.0;
  double amplitude = 0.0;
  double wavelength = 10.0;
  double spacing = 1.0;
};

void validate_perturbation(const Perturbation& p);

// Bends every lane beyond pivot_s. Points up to the pivot are kept, the rest
// is re-traced at `spacing` along the original arc length.
Lane perturb_lane(const Lane& lane, const Perturbation& p);
VectorMap perturb_map(const VectorMap& map, const Perturbation& p);

// Keeps each agent's (s, d) and heading deviation relative to its reference
// lane, moving it onto the same lane of the perturbed map.
Scene remap_agents(const Scene& scene, const VectorMap& original, const VectorMap& perturbed);

}  // namespace scenegen

#endif  // SCENEGEN_PERTURBATION_HPP_
