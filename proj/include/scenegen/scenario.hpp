#ifndef SCENEGEN_SCENARIO_HPP_
#define SCENEGEN_SCENARIO_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "scenegen/config.hpp"
#include "scenegen/diffusion.hpp"
#include "scenegen/frenet.hpp"
#include "scenegen/geometry.hpp"
#include "scenegen/latent.hpp"
#include "scenegen/nn/denoiser.hpp"
#include "scenegen/nn/training.hpp"

namespace scenegen {

struct Scenario {
  Scene scene;
  std::vector<Trajectory> trajectories;  // empty for init-only scenarios
  std::string provenance = "generated";
  std::uint64_t seed = 0;
};

struct Dataset {
  std::vector<VectorMap> maps;
  std::vector<Scenario> scenarios;
};

// Lane templates laid out in horizontal bands of a square map.
VectorMap synth_map(const std::string& shape, const SynthConfig& cfg, Rng& rng);

Dataset synth_dataset(const SynthConfig& cfg, const CandidateConfig& traj, std::uint64_t seed);

SpeedRange dataset_speed_range(const Dataset& data);

// The map's bounds define the normalized frame for both models, so training
// and sampling agree even though no agents exist before sampling.
struct PreparedMap {
  SceneNormalizer norm;
  VectorMap normalized;
  std::shared_ptr<const nn::MapTokens> tokens;
};

PreparedMap prepare_map(const VectorMap& map, const SpeedRange& speed, double token_spacing);

// Init channels: x, y, theta / pi, v (normalized).
Eigen::RowVector4d init_channels(const AgentInit& normalized);
AgentInit from_init_channels(const Eigen::RowVector4d& row, int type);
// Trajectory conditioning: x, y, cos theta, sin theta, v (normalized).
Eigen::RowVectorXd init_features(const AgentInit& normalized);

struct InitModel {
  nn::InitDenoiser<double> net;
  SpeedRange speed;
  double token_spacing = 0.1;
};

struct TrajModel {
  nn::TrajDenoiser<double> net;
  SpeedRange speed;
  double token_spacing = 0.1;
};

std::vector<nn::InitExample> init_examples(const Dataset& data, const SpeedRange& speed,
                                           double token_spacing);

// Local-frame ground-truth trajectories of every agent.
std::vector<Trajectory> local_trajectories(const Dataset& data);
PcaModel fit_codec(const Dataset& data, int k = kLatentDim);

// Whitened latent of a world-frame trajectory relative to its agent.
Eigen::RowVectorXd trajectory_latent(const Trajectory& world, const AgentInit& init,
                                     const PcaModel& codec, const Eigen::VectorXd& scale);
// Inverse of trajectory_latent, re-anchored at the agent position.
Trajectory latent_trajectory(const Eigen::RowVectorXd& z, const AgentInit& init,
                             const PcaModel& codec, const Eigen::VectorXd& scale);

Eigen::MatrixXd candidate_latents(const CandidateSet& set, const AgentInit& init,
                                  const PcaModel& codec, const Eigen::VectorXd& scale);

std::vector<nn::TrajExample> traj_examples(const Dataset& data, const PcaModel& codec,
                                           const SpeedRange& speed, const PipelineConfig& cfg);

struct TrainResult {
  nn::TrainLog log;
  double seconds = 0.0;
};

InitModel make_init_model(const PipelineConfig& cfg, const SpeedRange& speed,
                          std::uint64_t seed);
TrajModel make_traj_model(const PipelineConfig& cfg, const SpeedRange& speed,
                          std::uint64_t seed);

TrainResult train_init_model(InitModel& model, const Dataset& data, const PipelineConfig& cfg,
                             std::uint64_t seed, const nn::StepHook& hook = nullptr);
TrainResult train_traj_model(TrajModel& model, const Dataset& data, const PcaModel& codec,
                             const PipelineConfig& cfg, std::uint64_t seed,
                             const nn::StepHook& hook = nullptr);

NoiseSchedule schedule_from(const ScheduleConfig& cfg);

// Stage A: n agents in canonical order, in map coordinates.
Scene sample_scene(const VectorMap& map, int n_agents, const InitModel& model,
                   const NoiseSchedule& sched, Rng& rng);

// Stage B.
std::vector<CandidateSet> scene_candidates(const Scene& scene, const VectorMap& map,
                                           const CandidateConfig& cfg);

struct TrajSampleOptions {
  bool guidance = true;
  double strength = 0.1;
};

// Stage C: one trajectory per agent starting at its initial position.
std::vector<Trajectory> sample_trajectories(const VectorMap& map, const Scene& scene,
                                            const std::vector<CandidateSet>& candidates,
                                            const TrajModel& model, const PcaModel& codec,
                                            const NoiseSchedule& sched, Rng& rng,
                                            const TrajSampleOptions& opts,
                                            Eigen::MatrixXd* latents = nullptr);

Scenario generate_scenario(const VectorMap& map, int n_agents, const InitModel& init_model,
                           const TrajModel& traj_model, const PcaModel& codec,
                           const NoiseSchedule& sched, const PipelineConfig& cfg,
                           std::uint64_t seed, bool use_guidance);

// Fails with kNumeric when anything is non-finite.
void check_finite(const Scenario& s);

}  // namespace scenegen

#endif  // SCENEGEN_SCENARIO_HPP_
