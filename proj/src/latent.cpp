#include "scenegen/latent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scenegen {

namespace {

Eigen::Matrix2d rotation(double theta) {
  return Eigen::Rotation2Dd(theta).toRotationMatrix();
}

}  // namespace

Trajectory to_local_frame(const Trajectory& traj, const AgentInit& init) {
  const Eigen::RowVector2d origin(init.x, init.y);
  return (traj.rowwise() - origin) * rotation(init.theta);
}

Trajectory from_local_frame(const Trajectory& traj, const AgentInit& init) {
  const Eigen::RowVector2d origin(init.x, init.y);
  return (traj * rotation(init.theta).transpose()).rowwise() + origin;
}

Eigen::VectorXd flatten(const Trajectory& traj) {
  Eigen::VectorXd flat(traj.rows() * 2);
  for (Eigen::Index i = 0; i < traj.rows(); ++i) {
    flat[2 * i] = traj(i, 0);
    flat[2 * i + 1] = traj(i, 1);
  }
  return flat;
}

Trajectory unflatten(const Eigen::VectorXd& flat) {
  Trajectory traj(flat.size() / 2, 2);
  for (Eigen::Index i = 0; i < traj.rows(); ++i) {
    traj(i, 0) = flat[2 * i];
    traj(i, 1) = flat[2 * i + 1];
  }
  return traj;
}

PcaModel pca_fit(const std::vector<Trajectory>& trajs, int k) {
  const int n = static_cast<int>(trajs.size());
  if (k < 1 || n < k) {
    throw Error(ErrorCode::kInsufficientSamples,
                "pca_fit needs at least k samples (k=" + std::to_string(k) + ")");
  }
  const Eigen::Index dim = trajs.front().rows() * 2;
  if (k > dim) {
    throw Error(ErrorCode::kInsufficientSamples, "k exceeds the trajectory dimension");
  }
  Eigen::MatrixXd data(n, dim);
  for (int i = 0; i < n; ++i) {
    if (trajs[i].rows() * 2 != dim) {
      throw Error(ErrorCode::kShapeMismatch, "trajectories differ in length");
    }
    data.row(i) = flatten(trajs[i]).transpose();
  }

  PcaModel model;
  model.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double denom = std::max(n - 1, 1);

  model.basis.resize(k, dim);
  model.explained_variance.resize(k);
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd axis = svd.matrixV().col(c);
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis[arg] < 0.0) axis = -axis;
    model.basis.row(c) = axis.transpose();
    const double s = c < sv.size() ? sv[c] : 0.0;
    model.explained_variance[c] = s * s / denom;
  }

  double worst = 0.0;
  for (const auto& traj : trajs) {
    const Trajectory back = decode(model, encode(model, traj));
    worst = std::max(worst, (back - traj).cwiseAbs().maxCoeff());
  }
  model.residual_bound = worst;
  return model;
}

Eigen::VectorXd encode(const PcaModel& model, const Trajectory& traj) {
  if (!model.fitted()) throw Error(ErrorCode::kModelNotFitted, "PCA model not fitted");
  if (traj.rows() * 2 != model.mean.size()) {
    throw Error(ErrorCode::kShapeMismatch, "trajectory length differs from the model");
  }
  return model.basis * (flatten(traj) - model.mean);
}

Trajectory decode(const PcaModel& model, const Eigen::VectorXd& code) {
  if (!model.fitted()) throw Error(ErrorCode::kModelNotFitted, "PCA model not fitted");
  if (code.size() != model.basis.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "code length differs from the model");
  }
  return unflatten(model.mean + model.basis.transpose() * code);
}

Eigen::VectorXd latent_scale(const PcaModel& model, double floor) {
  return model.explained_variance.cwiseMax(0.0).cwiseSqrt().cwiseMax(floor);
}

SceneNormalizer SceneNormalizer::from_region(const Bounds& region, const SpeedRange& speed) {
  SceneNormalizer n;
  n.center = Vec2(0.5 * (region.xmin + region.xmax), 0.5 * (region.ymin + region.ymax));
  const double half = 0.5 * std::max(region.xmax - region.xmin, region.ymax - region.ymin);
  n.half_extent = half > 0.0 && std::isfinite(half) ? half : 1.0;
  n.speed = speed;
  return n;
}

double SceneNormalizer::speed_to_normalized(double v) const {
  const double span = speed.max - speed.min;
  if (!(span > 0.0)) return v - speed.min;
  return 2.0 * (v - speed.min) / span - 1.0;
}

double SceneNormalizer::speed_from_normalized(double v) const {
  const double span = speed.max - speed.min;
  if (!(span > 0.0)) return v + speed.min;
  return speed.min + 0.5 * (v + 1.0) * span;
}

AgentInit SceneNormalizer::normalize(const AgentInit& a) const {
  const Vec2 p = to_normalized(a.position());
  return {p.x(), p.y(), a.theta, speed_to_normalized(a.v), a.type};
}

AgentInit SceneNormalizer::denormalize(const AgentInit& a) const {
  const Vec2 p = from_normalized(a.position());
  return {p.x(), p.y(), a.theta, speed_from_normalized(a.v), a.type};
}

Bounds agent_region(const Scene& scene) {
  Bounds b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& a : scene.agents) {
    b.xmin = std::min(b.xmin, a.x);
    b.ymin = std::min(b.ymin, a.y);
    b.xmax = std::max(b.xmax, a.x);
    b.ymax = std::max(b.ymax, a.y);
  }
  return b;
}

std::pair<Scene, SceneNormalizer> normalize_scene(const Scene& scene, const VectorMap& map,
                                                  const SpeedRange& speed) {
  (void)map;
  if (scene.agents.empty()) throw Error(ErrorCode::kEmptyScene, "scene has no agents");
  const SceneNormalizer norm = SceneNormalizer::from_region(agent_region(scene), speed);
  Scene out = scene;
  for (auto& a : out.agents) a = norm.normalize(a);
  return {out, norm};
}

std::pair<Scene, SceneNormalizer> normalize_scene(const Scene& scene, const VectorMap& map) {
  if (scene.agents.empty()) throw Error(ErrorCode::kEmptyScene, "scene has no agents");
  SpeedRange speed{std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
  for (const auto& a : scene.agents) {
    speed.min = std::min(speed.min, a.v);
    speed.max = std::max(speed.max, a.v);
  }
  return normalize_scene(scene, map, speed);
}

Scene denormalize_scene(const Scene& scene, const SceneNormalizer& norm) {
  Scene out = scene;
  for (auto& a : out.agents) a = norm.denormalize(a);
  return out;
}

VectorMap normalize_map(const VectorMap& map, const SceneNormalizer& norm) {
  VectorMap out;
  for (const auto& lane : map.lanes) {
    Points2 pts(lane.points.rows(), 2);
    for (Eigen::Index k = 0; k < pts.rows(); ++k) {
      pts.row(k) = norm.to_normalized(lane.point(static_cast<int>(k))).transpose();
    }
    out.lanes.push_back(arclength_parameterize(pts));
  }
  const Vec2 lo = norm.to_normalized({map.bounds.xmin, map.bounds.ymin});
  const Vec2 hi = norm.to_normalized({map.bounds.xmax, map.bounds.ymax});
  out.bounds = {lo.x(), lo.y(), hi.x(), hi.y()};
  return out;
}

}  // namespace scenegen
