#ifndef SCENEGEN_CONFIG_HPP_
#define SCENEGEN_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scenegen/frenet.hpp"
#include "scenegen/metrics.hpp"
#include "scenegen/nn/denoiser.hpp"
#include "scenegen/nn/training.hpp"

namespace scenegen {

// Flat `key = value` text; `#` starts a comment.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text);
  static KeyValues load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::string get(const std::string& key, const std::string& fallback) const;
  double get(const std::string& key, double fallback) const;
  int get(const std::string& key, int fallback) const;
  bool get(const std::string& key, bool fallback) const;
  std::vector<double> get(const std::string& key, const std::vector<double>& fallback) const;

 private:
  std::map<std::string, std::string> entries_;
};

struct SynthConfig {
  int n_scenes = 20;
  int n_maps = 4;
  double map_size = 100.0;
  int lanes = 2;
  std::vector<std::string> shapes{"straight", "arc", "merge"};
  int agents_min = 2;
  int agents_max = 5;
  double speed_min = 2.0;
  double speed_max = 12.0;
  double init_lateral_noise = 0.3;
  double heading_noise = 0.02;
  double traj_lateral_noise = 0.3;
  double min_gap = 8.0;
  int agent_types = 1;
};

struct ScheduleConfig {
  int t_max = 100;
  double beta_start = 1e-4;
  double beta_end = 0.05;
};

struct SamplingConfig {
  bool guidance = true;
  double guidance_strength = 0.1;
};

struct PipelineConfig {
  PipelineConfig();

  SynthConfig synth;
  ScheduleConfig schedule;
  nn::DenoiserConfig model;
  nn::TrainConfig init_train;
  nn::TrainConfig traj_train;
  CandidateConfig candidates;
  SamplingConfig sampling;
  HistogramConfig histograms;
  double map_token_spacing = 0.1;  // normalized units
  double collision_radius = 1.0;
  double offroad_threshold = 4.0;

  // Unknown keys raise kInvalidConfig.
  static PipelineConfig from(const KeyValues& kv);
  KeyValues to_key_values() const;
};

}  // namespace scenegen

#endif  // SCENEGEN_CONFIG_HPP_
