#ifndef SCENEGEN_RENDER_HPP_
#define SCENEGEN_RENDER_HPP_

#include <string>
#include <vector>

#include "scenegen/frenet.hpp"
#include "scenegen/geometry.hpp"
#include "scenegen/scenario.hpp"

namespace scenegen {

struct RenderOptions {
  double pixels_per_meter = 6.0;
  double margin = 20.0;
  double heading_tick = 4.0;  // meters
};

// Lanes as black <path>s, each trajectory as a bold colored <path>, candidates
// as thin <polyline>s and initial poses as dots with heading ticks.
std::string render_svg(const VectorMap& map, const Scenario* scenario,
                       const std::vector<CandidateSet>* candidates,
                       const RenderOptions& opts = {});

}  // namespace scenegen

#endif  // SCENEGEN_RENDER_HPP_
