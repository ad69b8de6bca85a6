#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "scenegen/nn/attention.hpp"
#include "scenegen/scenario.hpp"

namespace scenegen {

namespace {

constexpr double kPointSpacing = 2.0;
constexpr double kTrajectoryClearance = 2.5;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double gaussian(Rng& rng, double sigma) {
  if (!(sigma > 0.0)) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

// Minimum distance between two trajectories at equal time indices.
double min_separation(const Trajectory& a, const Trajectory& b) {
  return (a - b).rowwise().norm().minCoeff();
}

}  // namespace

VectorMap synth_map(const std::string& shape, const SynthConfig& cfg, Rng& rng) {
  const double size = cfg.map_size;
  const int n = static_cast<int>(std::ceil(size / kPointSpacing));
  VectorMap map;
  for (int j = 0; j < cfg.lanes; ++j) {
    const double band = size / cfg.lanes;
    const double base = band * (j + 0.5) + uniform(rng, -0.06, 0.06) * band;
    const double sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    const double amp = sign * uniform(rng, 0.08, 0.2) * band;
    Points2 pts(n + 1, 2);
    for (int k = 0; k <= n; ++k) {
      const double x = size * k / n;
      double y = base;
      if (shape == "arc") {
        // Circular arc with sagitta amp over the full chord.
        const double half = 0.5 * size;
        const double r = (half * half + amp * amp) / (2.0 * std::abs(amp));
        const double u = x - half;
        y = base + sign * (std::sqrt(r * r - u * u) - (r - std::abs(amp)));
      } else if (shape == "merge") {
        y = base + amp * (1.0 - smoothstep(x / (0.6 * size)));
      } else if (shape != "straight") {
        throw Error(ErrorCode::kInvalidConfig, "unknown lane shape '" + shape + "'");
      }
      pts.row(k) << x, y;
    }
    map.lanes.push_back(arclength_parameterize(pts));
  }
  map.bounds = {0.0, 0.0, size, size};
  return map;
}

Dataset synth_dataset(const SynthConfig& cfg, const CandidateConfig& traj, std::uint64_t seed) {
  if (cfg.n_scenes < 1 || cfg.n_maps < 1 || cfg.lanes < 1 || cfg.agents_min < 1 ||
      cfg.agents_max < cfg.agents_min || cfg.shapes.empty() || cfg.speed_max < cfg.speed_min ||
      cfg.speed_min < 0.0 || !(cfg.map_size > 0.0) || cfg.agent_types < 1) {
    throw Error(ErrorCode::kInvalidConfig, "synthetic dataset configuration");
  }
  Rng rng(seed);
  Dataset data;
  for (int m = 0; m < cfg.n_maps; ++m) {
    data.maps.push_back(synth_map(cfg.shapes[m % cfg.shapes.size()], cfg, rng));
  }
  const int steps = traj.steps();
  const double horizon = steps * traj.dt;

  for (int k = 0; k < cfg.n_scenes; ++k) {
    const int map_ref = k % cfg.n_maps;
    const VectorMap& map = data.maps[map_ref];
    Scenario sc;
    sc.scene.map_ref = map_ref;
    sc.provenance = "ground_truth";
    sc.seed = seed;
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      const int n = std::uniform_int_distribution<int>(cfg.agents_min, cfg.agents_max)(rng);
      std::vector<AgentInit> agents;
      std::vector<Trajectory> trajs;
      for (int i = 0; i < n; ++i) {
        bool ok = false;
        for (int tries = 0; tries < 100 && !ok; ++tries) {
          const int li = std::uniform_int_distribution<int>(0, cfg.lanes - 1)(rng);
          const Lane& lane = map.lanes[li];
          double v = uniform(rng, cfg.speed_min, cfg.speed_max);
          v = std::min(v, 0.9 * lane.length() / horizon);
          const double s0 = uniform(rng, 0.0, lane.length() - v * horizon);
          const double d0 = std::clamp(gaussian(rng, cfg.init_lateral_noise), -1.0, 1.0);
          const double d1 = std::clamp(gaussian(rng, cfg.traj_lateral_noise), -1.5, 1.5);
          const double dtheta = gaussian(rng, cfg.heading_noise);
          const int type = std::uniform_int_distribution<int>(0, cfg.agent_types - 1)(rng);

          const Vec2 p = frenet_to_cart({s0, d0}, lane);
          Trajectory tr(steps + 1, 2);
          tr.row(0) = p.transpose();
          const auto rollout = frenet_rollout(quintic_coeffs(d0, d1, horizon), s0, v, traj.dt, steps);
          for (int h = 0; h < steps; ++h) tr.row(h + 1) = frenet_to_cart(rollout[h], lane).transpose();

          ok = true;
          for (std::size_t j = 0; j < agents.size() && ok; ++j) {
            ok = (agents[j].position() - p).norm() >= cfg.min_gap &&
                 min_separation(trajs[j], tr) >= kTrajectoryClearance;
          }
          if (ok) {
            agents.push_back({p.x(), p.y(), wrap_angle(heading_at(lane, s0) + dtheta), v, type});
            trajs.push_back(std::move(tr));
          }
        }
        if (!ok) break;
      }
      if (static_cast<int>(agents.size()) == n) {
        const auto order = nn::canonical_order(agents);
        for (int i : order) {
          sc.scene.agents.push_back(agents[i]);
          sc.trajectories.push_back(trajs[i]);
        }
        placed = true;
      }
    }
    if (!placed) {
      throw Error(ErrorCode::kInvalidConfig,
                  "could not place agents without conflicts; lower agents_max or min_gap");
    }
    data.scenarios.push_back(std::move(sc));
  }
  return data;
}

SpeedRange dataset_speed_range(const Dataset& data) {
  SpeedRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& sc : data.scenarios) {
    for (const auto& a : sc.scene.agents) {
      r.min = std::min(r.min, a.v);
      r.max = std::max(r.max, a.v);
    }
  }
  if (!std::isfinite(r.min)) return {0.0, 1.0};
  return r;
}

}  // namespace scenegen
