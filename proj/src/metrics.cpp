#include "scenegen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace scenegen {

Histogram make_histogram(const std::vector<double>& values, double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw Error(ErrorCode::kInvalidConfig, "histogram range");
  Histogram h;
  h.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) h.edges[b] = lo + (hi - lo) * b / bins;
  h.mass.assign(bins, 0.0);
  for (double v : values) {
    const int b = std::clamp(static_cast<int>(std::floor((v - lo) / (hi - lo) * bins)), 0,
                             bins - 1);
    h.mass[b] += 1.0;
  }
  if (!values.empty()) {
    for (double& m : h.mass) m /= static_cast<double>(values.size());
  }
  return h;
}

double jsd(const Histogram& p, const Histogram& q) {
  if (p.edges != q.edges || p.mass.size() != q.mass.size()) {
    throw Error(ErrorCode::kEdgeMismatch, "histograms use different bins");
  }
  auto kl_half = [](double a, double m) { return a > 0.0 ? a * std::log2(a / m) : 0.0; };
  double sum = 0.0;
  for (std::size_t b = 0; b < p.mass.size(); ++b) {
    const double m = 0.5 * (p.mass[b] + q.mass[b]);
    sum += 0.5 * kl_half(p.mass[b], m) + 0.5 * kl_half(q.mass[b], m);
  }
  return std::clamp(sum, 0.0, 1.0);
}

RadiusFn constant_radius(double r) {
  return [r](int) { return r; };
}

double collision_rate(const std::vector<AgentInit>& agents, const RadiusFn& radius) {
  if (agents.empty()) return 0.0;
  const std::size_t n = agents.size();
  std::vector<char> hit(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double reach = radius(agents[i].type) + radius(agents[j].type);
      if ((agents[i].position() - agents[j].position()).norm() < reach) hit[i] = hit[j] = 1;
    }
  }
  return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(n);
}

double collision_rate(const std::vector<Trajectory>& trajs, const std::vector<int>& types,
                      const RadiusFn& radius) {
  if (trajs.empty()) return 0.0;
  if (types.size() != trajs.size()) throw Error(ErrorCode::kShapeMismatch, "types per agent");
  const std::size_t n = trajs.size();
  std::vector<char> hit(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (trajs[i].rows() != trajs[j].rows()) {
        throw Error(ErrorCode::kShapeMismatch, "trajectory lengths differ");
      }
      const double reach = radius(types[i]) + radius(types[j]);
      for (Eigen::Index h = 1; h < trajs[i].rows(); ++h) {
        if ((trajs[i].row(h) - trajs[j].row(h)).norm() < reach) {
          hit[i] = hit[j] = 1;
          break;
        }
      }
    }
  }
  return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(n);
}

double road_distance(const Vec2& p, const VectorMap& map) {
  double best = std::numeric_limits<double>::infinity();
  for (const Lane& lane : map.lanes) best = std::min(best, point_to_polyline_distance(p, lane));
  return best;
}

double offroad_rate(const std::vector<AgentInit>& agents, const VectorMap& map,
                    double threshold) {
  if (agents.empty()) return 0.0;
  int off = 0;
  for (const AgentInit& a : agents) off += road_distance(a.position(), map) > threshold;
  return static_cast<double>(off) / static_cast<double>(agents.size());
}

double offroad_rate(const std::vector<Trajectory>& trajs, const VectorMap& map,
                    double threshold) {
  if (trajs.empty()) return 0.0;
  int off = 0;
  for (const Trajectory& tr : trajs) {
    for (Eigen::Index h = 1; h < tr.rows(); ++h) {
      if (road_distance(tr.row(h).transpose(), map) > threshold) {
        ++off;
        break;
      }
    }
  }
  return static_cast<double>(off) / static_cast<double>(trajs.size());
}

double near_edge(const std::vector<AgentInit>& agents, const VectorMap& map) {
  if (agents.empty()) return 0.0;
  double sum = 0.0;
  for (const AgentInit& a : agents) sum += road_distance(a.position(), map);
  return sum / static_cast<double>(agents.size());
}

void BehaviorSamples::append(const BehaviorSamples& other) {
  for (const auto& [name, vals] : other.values) {
    auto& dst = values[name];
    dst.insert(dst.end(), vals.begin(), vals.end());
  }
}

BehaviorSamples behavioral_samples(const std::vector<AgentInit>& agents, const VectorMap& map) {
  BehaviorSamples out;
  const std::size_t n = agents.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> dists;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dists.push_back((agents[i].position() - agents[j].position()).norm());
    }
    std::sort(dists.begin(), dists.end());
    if (n >= 2) out.values["near_dist"].push_back(dists.front());
    if (n >= 6) {
      double sum = 0.0;
      for (int k = 0; k < 5; ++k) sum += dists[k];
      out.values["local_density"].push_back(sum / 5.0);
    }
    const AgentInit& a = agents[i];
    const LaneHit hit = nearest_lane(a.position(), map);
    const Lane& lane = map.lanes[hit.lane];
    const FrenetCoord fc = cart_to_frenet(a.position(), lane);
    out.values["lat_dev"].push_back(std::abs(fc.d));
    out.values["ang_dev"].push_back(std::abs(wrap_angle(a.theta - heading_at(lane, fc.s))));
    out.values["speed"].push_back(a.v);
  }
  return out;
}

std::map<std::string, Histogram> behavioral_histograms(const BehaviorSamples& samples,
                                                       const HistogramConfig& cfg) {
  const std::map<std::string, HistogramRange> ranges = {{"near_dist", cfg.near_dist},
                                                        {"local_density", cfg.local_density},
                                                        {"lat_dev", cfg.lat_dev},
                                                        {"ang_dev", cfg.ang_dev},
                                                        {"speed", cfg.speed}};
  std::map<std::string, Histogram> out;
  for (const auto& [name, range] : ranges) {
    const auto it = samples.values.find(name);
    if (it == samples.values.end() || it->second.empty()) continue;
    out[name] = make_histogram(it->second, range.lo, range.hi, cfg.bins);
  }
  return out;
}

std::map<std::string, Histogram> behavioral_histograms(const std::vector<AgentInit>& agents,
                                                       const VectorMap& map,
                                                       const HistogramConfig& cfg) {
  return behavioral_histograms(behavioral_samples(agents, map), cfg);
}

LateralDeviation lateral_deviation(const std::vector<Trajectory>& trajs, const VectorMap& map,
                                   const std::vector<AgentInit>& inits) {
  if (trajs.size() != inits.size()) throw Error(ErrorCode::kShapeMismatch, "inits per agent");
  LateralDeviation out;
  if (trajs.empty()) return out;
  double sum = 0.0;
  double final_sum = 0.0;
  long count = 0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const Lane& lane = map.lanes[nearest_lane(inits[i].position(), map).lane];
    const Trajectory& tr = trajs[i];
    if (tr.rows() < 2) throw Error(ErrorCode::kShapeMismatch, "trajectory has no future");
    for (Eigen::Index h = 1; h < tr.rows(); ++h) {
      const double d = std::abs(cart_to_frenet(tr.row(h).transpose(), lane).d);
      sum += d;
      ++count;
      if (h == tr.rows() - 1) final_sum += d;
    }
  }
  out.avg = sum / static_cast<double>(count);
  out.final = final_sum / static_cast<double>(trajs.size());
  return out;
}

DisplacementErrors ade_fde_mr(const std::vector<Trajectory>& pred,
                              const std::vector<Trajectory>& gt, double miss_threshold) {
  if (pred.size() != gt.size()) throw Error(ErrorCode::kShapeMismatch, "agent counts differ");
  DisplacementErrors out;
  if (pred.empty()) return out;
  double ade = 0.0;
  double fde = 0.0;
  int misses = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].rows() != gt[i].rows() || pred[i].rows() < 2) {
      throw Error(ErrorCode::kShapeMismatch, "trajectory shapes differ");
    }
    const Eigen::Index last = pred[i].rows() - 1;
    const Eigen::VectorXd err =
        (pred[i].bottomRows(last) - gt[i].bottomRows(last)).rowwise().norm();
    ade += err.mean();
    fde += err[last - 1];
    misses += err[last - 1] > miss_threshold;
  }
  const double n = static_cast<double>(pred.size());
  out.ade = ade / n;
  out.fde = fde / n;
  out.mr = misses / n;
  return out;
}

std::optional<double> MetricReport::get(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) return std::nullopt;
  return it->second;
}

}  // namespace scenegen
