#ifndef SCENEGEN_LATENT_HPP_
#define SCENEGEN_LATENT_HPP_

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "scenegen/geometry.hpp"
#include "scenegen/types.hpp"

namespace scenegen {

// Translate to the agent's position and rotate so its heading is +x.
Trajectory to_local_frame(const Trajectory& traj, const AgentInit& init);
Trajectory from_local_frame(const Trajectory& traj, const AgentInit& init);

// Interleaved x1, y1, x2, y2, ... order.
Eigen::VectorXd flatten(const Trajectory& traj);
Trajectory unflatten(const Eigen::VectorXd& flat);

inline constexpr int kLatentDim = 10;
inline constexpr const char* kFlattenOrder = "interleaved_xy";

struct PcaModel {
  Eigen::VectorXd mean;               // 2P
  Eigen::MatrixXd basis;              // k x 2P, orthonormal rows
  Eigen::VectorXd explained_variance; // k, non-increasing
  double residual_bound = 0.0;        // max training |decode(encode) - x|, meters

  bool fitted() const { return basis.rows() > 0 && mean.size() == basis.cols(); }
  int components() const { return static_cast<int>(basis.rows()); }
  int points() const { return static_cast<int>(mean.size() / 2); }
};

PcaModel pca_fit(const std::vector<Trajectory>& trajs, int k = kLatentDim);

Eigen::VectorXd encode(const PcaModel& model, const Trajectory& traj);
Trajectory decode(const PcaModel& model, const Eigen::VectorXd& code);

// Per-component scale (sqrt of explained variance, floored) used to whiten
// codes before diffusion.
Eigen::VectorXd latent_scale(const PcaModel& model, double floor = 1e-3);

struct SpeedRange {
  double min = 0.0;
  double max = 1.0;
};

// Uniform similarity map of a square region onto [-1, 1]^2 plus min-max speed
// scaling onto [-1, 1].
struct SceneNormalizer {
  Vec2 center = Vec2::Zero();
  double half_extent = 1.0;
  SpeedRange speed;

  static SceneNormalizer from_region(const Bounds& region, const SpeedRange& speed);

  Vec2 to_normalized(const Vec2& p) const { return (p - center) / half_extent; }
  Vec2 from_normalized(const Vec2& p) const { return center + half_extent * p; }
  double speed_to_normalized(double v) const;
  double speed_from_normalized(double v) const;

  AgentInit normalize(const AgentInit& a) const;
  AgentInit denormalize(const AgentInit& a) const;
};

Bounds agent_region(const Scene& scene);

// Maps the agents' bounding region onto [-1, 1]^2. Speed bounds default to the
// scene's own range when not given. Coincident agents use a unit half extent.
std::pair<Scene, SceneNormalizer> normalize_scene(const Scene& scene, const VectorMap& map);
std::pair<Scene, SceneNormalizer> normalize_scene(const Scene& scene, const VectorMap& map,
                                                  const SpeedRange& speed);
Scene denormalize_scene(const Scene& scene, const SceneNormalizer& norm);

// Lanes re-parameterized in the normalized frame.
VectorMap normalize_map(const VectorMap& map, const SceneNormalizer& norm);

}  // namespace scenegen

#endif  // SCENEGEN_LATENT_HPP_
