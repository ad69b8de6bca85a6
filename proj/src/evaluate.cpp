#include "scenegen/evaluate.hpp"

namespace scenegen {

namespace {

bool has_trajectories(const std::vector<Scenario>& set) {
  if (set.empty()) return false;
  for (const auto& sc : set) {
    if (sc.trajectories.empty() || sc.trajectories.size() != sc.scene.agents.size()) return false;
  }
  return true;
}

BehaviorSamples pooled_samples(const std::vector<Scenario>& set,
                               const std::vector<VectorMap>& maps) {
  BehaviorSamples all;
  for (const auto& sc : set) all.append(behavioral_samples(sc.scene.agents, maps.at(sc.scene.map_ref)));
  return all;
}

std::vector<int> agent_types(const Scene& scene) {
  std::vector<int> types;
  for (const auto& a : scene.agents) types.push_back(a.type);
  return types;
}

}  // namespace

MetricReport evaluate(const std::vector<Scenario>& scenarios, const std::vector<VectorMap>& maps,
                      const std::vector<Scenario>* gt, const PipelineConfig& cfg) {
  MetricReport report;
  report.config = cfg.to_key_values().entries();
  const RadiusFn radius = constant_radius(cfg.collision_radius);

  double agents = 0.0;
  double collisions = 0.0;
  double offroad = 0.0;
  double edge = 0.0;
  for (const auto& sc : scenarios) {
    const VectorMap& map = maps.at(sc.scene.map_ref);
    const double n = static_cast<double>(sc.scene.agents.size());
    agents += n;
    collisions += n * collision_rate(sc.scene.agents, radius);
    offroad += n * offroad_rate(sc.scene.agents, map, cfg.offroad_threshold);
    edge += n * near_edge(sc.scene.agents, map);
  }
  if (agents > 0.0) {
    report.values["collision_rate"] = collisions / agents;
    report.values["offroad_rate"] = offroad / agents;
    report.values["near_edge"] = edge / agents;
  }

  const auto generated = behavioral_histograms(pooled_samples(scenarios, maps), cfg.histograms);
  for (const auto& [name, h] : generated) report.histograms["generated." + name] = h;
  if (gt != nullptr) {
    const auto reference = behavioral_histograms(pooled_samples(*gt, maps), cfg.histograms);
    for (const auto& [name, h] : reference) {
      report.histograms["reference." + name] = h;
      const auto it = generated.find(name);
      if (it != generated.end()) report.values["jsd_" + name] = jsd(it->second, h);
    }
  }

  if (has_trajectories(scenarios)) {
    double cr = 0.0;
    double traj_off = 0.0;
    double avg_lat = 0.0;
    double final_lat = 0.0;
    for (const auto& sc : scenarios) {
      const VectorMap& map = maps.at(sc.scene.map_ref);
      const double n = static_cast<double>(sc.scene.agents.size());
      cr += n * collision_rate(sc.trajectories, agent_types(sc.scene), radius);
      traj_off += n * offroad_rate(sc.trajectories, map, cfg.offroad_threshold);
      const LateralDeviation ld = lateral_deviation(sc.trajectories, map, sc.scene.agents);
      avg_lat += n * ld.avg;
      final_lat += n * ld.final;
    }
    report.values["actor_cr"] = cr / agents;
    report.values["traj_offroad_rate"] = traj_off / agents;
    report.values["avg_lat_dev"] = avg_lat / agents;
    report.values["final_lat_dev"] = final_lat / agents;

    if (gt != nullptr && has_trajectories(*gt) && gt->size() == scenarios.size()) {
      std::vector<Trajectory> pred;
      std::vector<Trajectory> ref;
      bool aligned = true;
      for (std::size_t k = 0; k < scenarios.size() && aligned; ++k) {
        aligned = scenarios[k].trajectories.size() == (*gt)[k].trajectories.size();
        pred.insert(pred.end(), scenarios[k].trajectories.begin(), scenarios[k].trajectories.end());
        ref.insert(ref.end(), (*gt)[k].trajectories.begin(), (*gt)[k].trajectories.end());
      }
      if (aligned) {
        const DisplacementErrors de = ade_fde_mr(pred, ref);
        report.values["ade"] = de.ade;
        report.values["fde"] = de.fde;
        report.values["mr"] = de.mr;
      }
    }
  }
  return report;
}

}  // namespace scenegen
