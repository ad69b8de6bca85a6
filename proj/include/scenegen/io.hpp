#ifndef SCENEGEN_IO_HPP_
#define SCENEGEN_IO_HPP_

#include <json.hpp>

#include <string>
#include <vector>

#include "scenegen/frenet.hpp"
#include "scenegen/geometry.hpp"
#include "scenegen/latent.hpp"
#include "scenegen/metrics.hpp"
#include "scenegen/scenario.hpp"

namespace scenegen {

using Json = nlohmann::json;

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);
Json load_json(const std::string& path);
// Two-space indented JSON with a trailing newline.
void save_json(const std::string& path, const Json& j);

Json to_json(const VectorMap& map);
VectorMap map_from_json(const Json& j);

Json to_json(const Scene& scene);
Scene scene_from_json(const Json& j);

Json to_json(const Scenario& sc);
Scenario scenario_from_json(const Json& j);

// {"maps": [...], "scenarios": [...]}. A bare map object loads as a dataset
// with one map and no scenarios.
Json to_json(const Dataset& data);
Dataset dataset_from_json(const Json& j);

Json to_json(const PcaModel& model);
PcaModel pca_from_json(const Json& j);

Json candidates_to_json(const std::vector<CandidateSet>& per_agent);

Json to_json(const MetricReport& report);

Json to_json(const InitModel& model);
InitModel init_model_from_json(const Json& j);
Json to_json(const TrajModel& model);
TrajModel traj_model_from_json(const Json& j);

}  // namespace scenegen

#endif  // SCENEGEN_IO_HPP_
