#ifndef SCENEGEN_EVALUATE_HPP_
#define SCENEGEN_EVALUATE_HPP_

#include <vector>

#include "scenegen/config.hpp"
#include "scenegen/metrics.hpp"
#include "scenegen/scenario.hpp"

namespace scenegen {

// Agent-weighted aggregate over scenarios. Init metrics are always present;
// JSD needs a reference set; trajectory metrics need trajectories on every
// scenario; ADE/FDE/MR need reference trajectories with matching agents.
MetricReport evaluate(const std::vector<Scenario>& scenarios, const std::vector<VectorMap>& maps,
                      const std::vector<Scenario>* gt, const PipelineConfig& cfg);

}  // namespace scenegen

#endif  // SCENEGEN_EVALUATE_HPP_
