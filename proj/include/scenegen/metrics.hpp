#ifndef SCENEGEN_METRICS_HPP_
#define SCENEGEN_METRICS_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scenegen/geometry.hpp"
#include "scenegen/types.hpp"

namespace scenegen {

struct Histogram {
  std::vector<double> edges;  // B + 1 ascending
  std::vector<double> mass;   // B, sums to 1 when any sample was added
};

// Uniform bins over [lo, hi]; values outside are clamped into the end bins.
Histogram make_histogram(const std::vector<double>& values, double lo, double hi, int bins);

// Base-2 Jensen-Shannon divergence; throws kEdgeMismatch on differing edges.
double jsd(const Histogram& p, const Histogram& q);

// Disc radius per agent type.
using RadiusFn = std::function<double(int)>;
RadiusFn constant_radius(double r);

// Fraction of agents overlapping another agent at the initial instant.
double collision_rate(const std::vector<AgentInit>& agents, const RadiusFn& radius);

// Fraction of agents overlapping another agent at any future step (rows 1..H).
double collision_rate(const std::vector<Trajectory>& trajs, const std::vector<int>& types,
                      const RadiusFn& radius);

// Distance from p to the closest lane centerline.
double road_distance(const Vec2& p, const VectorMap& map);

double offroad_rate(const std::vector<AgentInit>& agents, const VectorMap& map,
                    double threshold = 4.0);
double offroad_rate(const std::vector<Trajectory>& trajs, const VectorMap& map,
                    double threshold = 4.0);
double near_edge(const std::vector<AgentInit>& agents, const VectorMap& map);

struct HistogramRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct HistogramConfig {
  int bins = 20;
  HistogramRange near_dist{0.0, 50.0};
  HistogramRange local_density{0.0, 50.0};
  HistogramRange lat_dev{0.0, 5.0};
  HistogramRange ang_dev{0.0, 3.14159265358979323846};
  HistogramRange speed{0.0, 20.0};
};

inline const std::vector<std::string>& behavior_names() {
  static const std::vector<std::string> names = {"near_dist", "local_density", "lat_dev",
                                                 "ang_dev", "speed"};
  return names;
}

// Per-agent raw values for the behavioral statistics. Distance statistics are
// only filled when the scene has enough agents (2 for near_dist, 6 for
// local_density).
struct BehaviorSamples {
  std::map<std::string, std::vector<double>> values;

  void append(const BehaviorSamples& other);
};

BehaviorSamples behavioral_samples(const std::vector<AgentInit>& agents, const VectorMap& map);

// Histograms of the available statistics; empty statistics are left out.
std::map<std::string, Histogram> behavioral_histograms(const BehaviorSamples& samples,
                                                       const HistogramConfig& cfg);
std::map<std::string, Histogram> behavioral_histograms(const std::vector<AgentInit>& agents,
                                                       const VectorMap& map,
                                                       const HistogramConfig& cfg);

struct LateralDeviation {
  double avg = 0.0;
  double final = 0.0;
};

// |d| of every future point with respect to each agent's reference lane (the
// lane nearest its initial position).
LateralDeviation lateral_deviation(const std::vector<Trajectory>& trajs, const VectorMap& map,
                                   const std::vector<AgentInit>& inits);

struct DisplacementErrors {
  double ade = 0.0;
  double fde = 0.0;
  double mr = 0.0;
};

DisplacementErrors ade_fde_mr(const std::vector<Trajectory>& pred,
                              const std::vector<Trajectory>& gt, double miss_threshold = 2.0);

struct MetricReport {
  std::map<std::string, double> values;
  std::map<std::string, Histogram> histograms;
  std::map<std::string, std::string> config;

  std::optional<double> get(const std::string& key) const;
};

}  // namespace scenegen

#endif  // SCENEGEN_METRICS_HPP_
