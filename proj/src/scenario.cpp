#include "scenegen/scenario.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

namespace scenegen {

PreparedMap prepare_map(const VectorMap& map, const SpeedRange& speed, double token_spacing) {
  validate_map(map);
  if (map.lanes.empty()) throw Error(ErrorCode::kNoReferenceLane, "map has no lanes");
  PreparedMap out;
  out.norm = SceneNormalizer::from_region(map.bounds, speed);
  out.normalized = normalize_map(map, out.norm);
  out.tokens = std::make_shared<const nn::MapTokens>(
      nn::make_map_tokens(out.normalized, token_spacing));
  return out;
}

Eigen::RowVector4d init_channels(const AgentInit& a) {
  return {a.x, a.y, wrap_angle(a.theta) / std::numbers::pi, a.v};
}

AgentInit from_init_channels(const Eigen::RowVector4d& row, int type) {
  return {row[0], row[1], wrap_angle(row[2] * std::numbers::pi), row[3], type};
}

Eigen::RowVectorXd init_features(const AgentInit& a) {
  Eigen::RowVectorXd f(nn::kInitFeatures);
  f << a.x, a.y, std::cos(a.theta), std::sin(a.theta), a.v;
  return f;
}

std::vector<nn::InitExample> init_examples(const Dataset& data, const SpeedRange& speed,
                                           double token_spacing) {
  std::vector<PreparedMap> maps;
  for (const auto& m : data.maps) maps.push_back(prepare_map(m, speed, token_spacing));
  std::vector<nn::InitExample> out;
  for (const auto& sc : data.scenarios) {
    const PreparedMap& pm = maps.at(sc.scene.map_ref);
    std::vector<AgentInit> agents;
    for (const auto& a : sc.scene.agents) agents.push_back(pm.norm.normalize(a));
    agents = nn::apply_order(agents, nn::canonical_order(agents));
    nn::InitExample ex;
    ex.x0.resize(static_cast<Eigen::Index>(agents.size()), 4);
    for (std::size_t i = 0; i < agents.size(); ++i) {
      ex.x0.row(static_cast<Eigen::Index>(i)) = init_channels(agents[i]);
      ex.types.push_back(agents[i].type);
    }
    ex.map = pm.tokens;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Trajectory> local_trajectories(const Dataset& data) {
  std::vector<Trajectory> out;
  for (const auto& sc : data.scenarios) {
    for (std::size_t i = 0; i < sc.trajectories.size(); ++i) {
      out.push_back(to_local_frame(sc.trajectories[i], sc.scene.agents.at(i)));
    }
  }
  return out;
}

PcaModel fit_codec(const Dataset& data, int k) { return pca_fit(local_trajectories(data), k); }

Eigen::RowVectorXd trajectory_latent(const Trajectory& world, const AgentInit& init,
                                     const PcaModel& codec, const Eigen::VectorXd& scale) {
  return encode(codec, to_local_frame(world, init)).cwiseQuotient(scale).transpose();
}

Trajectory latent_trajectory(const Eigen::RowVectorXd& z, const AgentInit& init,
                             const PcaModel& codec, const Eigen::VectorXd& scale) {
  Trajectory tr = from_local_frame(decode(codec, z.transpose().cwiseProduct(scale)), init);
  const Eigen::RowVector2d shift = tr.row(0) - init.position().transpose();
  tr.rowwise() -= shift;
  return tr;
}

Eigen::MatrixXd candidate_latents(const CandidateSet& set, const AgentInit& init,
                                  const PcaModel& codec, const Eigen::VectorXd& scale) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(set.size()), codec.components());
  for (std::size_t k = 0; k < set.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = trajectory_latent(set[k].xy, init, codec, scale);
  }
  return out;
}

namespace {

struct TrajConditioning {
  Eigen::MatrixXd init_features;
  std::vector<int> types;
  std::vector<Eigen::MatrixXd> candidates;
  nn::Mask m2a;
};

TrajConditioning traj_conditioning(const Scene& scene, const PreparedMap& pm,
                                   const std::vector<CandidateSet>& candidates,
                                   const PcaModel& codec, const Eigen::VectorXd& scale,
                                   double m2a_radius) {
  const auto n = static_cast<Eigen::Index>(scene.agents.size());
  TrajConditioning c;
  c.init_features.resize(n, nn::kInitFeatures);
  Eigen::MatrixXd xy(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const AgentInit& a = scene.agents[i];
    const AgentInit na = pm.norm.normalize(a);
    c.init_features.row(i) = init_features(na);
    xy.row(i) << na.x, na.y;
    c.types.push_back(a.type);
    c.candidates.push_back(candidate_latents(candidates.at(i), a, codec, scale));
  }
  c.m2a = nn::m2a_mask(xy, *pm.tokens, m2a_radius);
  return c;
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<nn::TrajExample> traj_examples(const Dataset& data, const PcaModel& codec,
                                           const SpeedRange& speed, const PipelineConfig& cfg) {
  const Eigen::VectorXd scale = latent_scale(codec);
  std::vector<PreparedMap> maps;
  for (const auto& m : data.maps) maps.push_back(prepare_map(m, speed, cfg.map_token_spacing));
  std::vector<nn::TrajExample> out;
  for (const auto& sc : data.scenarios) {
    if (sc.trajectories.size() != sc.scene.agents.size()) {
      throw Error(ErrorCode::kShapeMismatch, "scenario lacks ground-truth trajectories");
    }
    const PreparedMap& pm = maps.at(sc.scene.map_ref);
    const VectorMap& map = data.maps.at(sc.scene.map_ref);
    TrajConditioning c = traj_conditioning(sc.scene, pm, scene_candidates(sc.scene, map, cfg.candidates),
                                           codec, scale, cfg.model.m2a_radius);
    nn::TrajExample ex;
    ex.tau_z0.resize(static_cast<Eigen::Index>(sc.scene.agents.size()), codec.components());
    for (std::size_t i = 0; i < sc.scene.agents.size(); ++i) {
      ex.tau_z0.row(static_cast<Eigen::Index>(i)) =
          trajectory_latent(sc.trajectories[i], sc.scene.agents[i], codec, scale);
    }
    ex.init_features = std::move(c.init_features);
    ex.types = std::move(c.types);
    ex.map = pm.tokens;
    ex.candidates = std::move(c.candidates);
    ex.m2a = std::move(c.m2a);
    out.push_back(std::move(ex));
  }
  return out;
}

InitModel make_init_model(const PipelineConfig& cfg, const SpeedRange& speed,
                          std::uint64_t seed) {
  return {nn::InitDenoiser<double>(cfg.model, seed), speed, cfg.map_token_spacing};
}

TrajModel make_traj_model(const PipelineConfig& cfg, const SpeedRange& speed,
                          std::uint64_t seed) {
  nn::DenoiserConfig mc = cfg.model;
  mc.latent_dim = kLatentDim;
  return {nn::TrajDenoiser<double>(mc, seed), speed, cfg.map_token_spacing};
}

NoiseSchedule schedule_from(const ScheduleConfig& cfg) {
  return make_schedule(cfg.t_max, cfg.beta_start, cfg.beta_end);
}

TrainResult train_init_model(InitModel& model, const Dataset& data, const PipelineConfig& cfg,
                             std::uint64_t seed, const nn::StepHook& hook) {
  const auto start = std::chrono::steady_clock::now();
  nn::TrainConfig tc = cfg.init_train;
  tc.seed = seed;
  TrainResult r;
  r.log = nn::train_init(init_examples(data, model.speed, model.token_spacing),
                         schedule_from(cfg.schedule), model.net, tc, hook);
  r.seconds = elapsed_since(start);
  return r;
}

TrainResult train_traj_model(TrajModel& model, const Dataset& data, const PcaModel& codec,
                             const PipelineConfig& cfg, std::uint64_t seed,
                             const nn::StepHook& hook) {
  const auto start = std::chrono::steady_clock::now();
  nn::TrainConfig tc = cfg.traj_train;
  tc.seed = seed;
  PipelineConfig local = cfg;
  local.map_token_spacing = model.token_spacing;
  TrainResult r;
  r.log = nn::train_traj(traj_examples(data, codec, model.speed, local),
                         schedule_from(cfg.schedule), model.net, tc, hook);
  r.seconds = elapsed_since(start);
  return r;
}

Scene sample_scene(const VectorMap& map, int n_agents, const InitModel& model,
                   const NoiseSchedule& sched, Rng& rng) {
  if (n_agents < 1) throw Error(ErrorCode::kEmptyScene, "n_agents must be at least 1");
  const PreparedMap pm = prepare_map(map, model.speed, model.token_spacing);
  nn::InitInput in;
  in.types.assign(n_agents, 0);
  in.map = pm.tokens.get();
  in.a2a = nn::cdb_mask(nn::CdbMode::kCentralized, n_agents);
  const double radius = model.net.config().m2a_radius;
  auto denoiser = [&](const Eigen::MatrixXd& x, int t) {
    in.x_t = x;
    in.t = t;
    in.m2a = nn::m2a_mask(x.leftCols(2), *pm.tokens, radius);
    return model.net.predict(in);
  };
  const Eigen::MatrixXd x0 = sample_loop(denoiser, n_agents, nn::InitDenoiser<double>::kChannels,
                                         sched, rng);
  if (!x0.allFinite()) throw Error(ErrorCode::kNumeric, "init sampling diverged");
  std::vector<AgentInit> agents;
  for (int i = 0; i < n_agents; ++i) {
    AgentInit a = pm.norm.denormalize(from_init_channels(x0.row(i), in.types[i]));
    a.v = std::max(a.v, 0.0);
    agents.push_back(a);
  }
  Scene scene;
  scene.agents = nn::apply_order(agents, nn::canonical_order(agents));
  return scene;
}

std::vector<CandidateSet> scene_candidates(const Scene& scene, const VectorMap& map,
                                           const CandidateConfig& cfg) {
  std::vector<CandidateSet> out;
  out.reserve(scene.agents.size());
  for (const auto& a : scene.agents) out.push_back(candidates_or_fallback(a, map, cfg));
  return out;
}

std::vector<Trajectory> sample_trajectories(const VectorMap& map, const Scene& scene,
                                            const std::vector<CandidateSet>& candidates,
                                            const TrajModel& model, const PcaModel& codec,
                                            const NoiseSchedule& sched, Rng& rng,
                                            const TrajSampleOptions& opts,
                                            Eigen::MatrixXd* latents) {
  if (scene.agents.empty()) throw Error(ErrorCode::kEmptyScene, "scene has no agents");
  if (candidates.size() != scene.agents.size()) {
    throw Error(ErrorCode::kShapeMismatch, "one candidate set per agent required");
  }
  const PreparedMap pm = prepare_map(map, model.speed, model.token_spacing);
  const Eigen::VectorXd scale = latent_scale(codec);
  TrajConditioning c = traj_conditioning(scene, pm, candidates, codec, scale,
                                         model.net.config().m2a_radius);
  const int n = static_cast<int>(scene.agents.size());
  nn::TrajInput in;
  in.init_features = c.init_features;
  in.types = c.types;
  in.map = pm.tokens.get();
  in.candidates = c.candidates;
  in.a2a = nn::cdb_mask(nn::CdbMode::kCentralized, n);
  in.m2a = c.m2a;
  auto denoiser = [&](const Eigen::MatrixXd& x, int t) {
    in.tau_z = x;
    in.t = t;
    return model.net.predict(in);
  };
  Guidance guide;
  if (opts.guidance) {
    guide = [&](const Eigen::MatrixXd& x, int) {
      return guided_step(x, c.candidates, opts.strength);
    };
  }
  const Eigen::MatrixXd z = sample_loop(denoiser, n, codec.components(), sched, rng, guide);
  if (!z.allFinite()) throw Error(ErrorCode::kNumeric, "trajectory sampling diverged");
  if (latents != nullptr) *latents = z;
  std::vector<Trajectory> out;
  for (int i = 0; i < n; ++i) out.push_back(latent_trajectory(z.row(i), scene.agents[i], codec, scale));
  return out;
}

Scenario generate_scenario(const VectorMap& map, int n_agents, const InitModel& init_model,
                           const TrajModel& traj_model, const PcaModel& codec,
                           const NoiseSchedule& sched, const PipelineConfig& cfg,
                           std::uint64_t seed, bool use_guidance) {
  if (n_agents < 1) throw Error(ErrorCode::kEmptyScene, "n_agents must be at least 1");
  Rng rng(seed);
  Scenario out;
  out.seed = seed;
  out.provenance = "generated";
  out.scene = sample_scene(map, n_agents, init_model, sched, rng);
  const auto candidates = scene_candidates(out.scene, map, cfg.candidates);
  out.trajectories = sample_trajectories(map, out.scene, candidates, traj_model, codec, sched, rng,
                                         {use_guidance, cfg.sampling.guidance_strength});
  check_finite(out);
  return out;
}

void check_finite(const Scenario& s) {
  for (const auto& a : s.scene.agents) {
    if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(a.theta) ||
        !std::isfinite(a.v)) {
      throw Error(ErrorCode::kNumeric, "non-finite agent state");
    }
  }
  for (const auto& tr : s.trajectories) {
    if (!tr.allFinite()) throw Error(ErrorCode::kNumeric, "non-finite trajectory");
  }
}

}  // namespace scenegen
