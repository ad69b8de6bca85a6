#include "scenegen/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <variant>

namespace scenegen {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidConfig, "key '" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidConfig, "key '" + key + "' expects an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw Error(ErrorCode::kInvalidConfig, "key '" + key + "' expects a boolean, got '" + text + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ",";
    if constexpr (std::is_same_v<T, double>) {
      out += format_double(items[i]);
    } else {
      out += items[i];
    }
  }
  return out;
}

using Target = std::variant<int*, double*, bool*, std::vector<double>*, std::vector<std::string>*,
                            nn::AttentionKind*, nn::OptimizerKind*, HistogramRange*, std::string*>;

struct Binding {
  const char* key;
  Target target;
};

std::vector<Binding> bindings(PipelineConfig& c, std::string& schedule_kind) {
  return {
      {"n_scenes", &c.synth.n_scenes},
      {"n_maps", &c.synth.n_maps},
      {"map_size", &c.synth.map_size},
      {"lanes", &c.synth.lanes},
      {"shapes", &c.synth.shapes},
      {"agents_min", &c.synth.agents_min},
      {"agents_max", &c.synth.agents_max},
      {"speed_min", &c.synth.speed_min},
      {"speed_max", &c.synth.speed_max},
      {"init_lateral_noise", &c.synth.init_lateral_noise},
      {"heading_noise", &c.synth.heading_noise},
      {"traj_lateral_noise", &c.synth.traj_lateral_noise},
      {"min_gap", &c.synth.min_gap},
      {"type_count", &c.synth.agent_types},
      {"t_max", &c.schedule.t_max},
      {"beta_start", &c.schedule.beta_start},
      {"beta_end", &c.schedule.beta_end},
      {"schedule", &schedule_kind},
      {"width", &c.model.width},
      {"layers", &c.model.layers},
      {"lambda_init", &c.model.lambda_init},
      {"m2a_radius", &c.model.m2a_radius},
      {"ff_mult", &c.model.ff_mult},
      {"agent_types", &c.model.agent_types},
      {"attention", &c.model.attention},
      {"map_token_spacing", &c.map_token_spacing},
      {"optimizer", &c.init_train.optimizer},
      {"traj_optimizer", &c.traj_train.optimizer},
      {"lr", &c.init_train.lr},
      {"epochs", &c.init_train.epochs},
      {"cosine_decay", &c.init_train.cosine_decay},
      {"traj_cosine_decay", &c.traj_train.cosine_decay},
      {"batch_size", &c.init_train.batch_size},
      {"momentum", &c.init_train.momentum},
      {"grad_clip", &c.init_train.grad_clip},
      {"p_decentralized", &c.init_train.p_decentralized},
      {"traj_lr", &c.traj_train.lr},
      {"traj_epochs", &c.traj_train.epochs},
      {"traj_batch_size", &c.traj_train.batch_size},
      {"traj_momentum", &c.traj_train.momentum},
      {"traj_grad_clip", &c.traj_train.grad_clip},
      {"v_grid", &c.candidates.v_grid},
      {"d_grid", &c.candidates.d_grid},
      {"horizon", &c.candidates.horizon},
      {"dt", &c.candidates.dt},
      {"lane_radius", &c.candidates.lane_radius},
      {"guidance", &c.sampling.guidance},
      {"guidance_strength", &c.sampling.guidance_strength},
      {"hist_bins", &c.histograms.bins},
      {"range_near_dist", &c.histograms.near_dist},
      {"range_local_density", &c.histograms.local_density},
      {"range_lat_dev", &c.histograms.lat_dev},
      {"range_ang_dev", &c.histograms.ang_dev},
      {"range_speed", &c.histograms.speed},
      {"collision_radius", &c.collision_radius},
      {"offroad_threshold", &c.offroad_threshold},
  };
}

void assign(const std::string& key, const std::string& text, Target target) {
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, int>) {
          *p = parse_int(key, text);
        } else if constexpr (std::is_same_v<T, double>) {
          *p = parse_double(key, text);
        } else if constexpr (std::is_same_v<T, bool>) {
          *p = parse_bool(key, text);
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          p->clear();
          for (const auto& item : split_list(text)) p->push_back(parse_double(key, item));
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
          *p = split_list(text);
        } else if constexpr (std::is_same_v<T, nn::AttentionKind>) {
          if (text == "differential") {
            *p = nn::AttentionKind::kDifferential;
          } else if (text == "standard") {
            *p = nn::AttentionKind::kStandard;
          } else {
            throw Error(ErrorCode::kInvalidConfig, "attention must be differential or standard");
          }
        } else if constexpr (std::is_same_v<T, nn::OptimizerKind>) {
          if (text == "sgd") {
            *p = nn::OptimizerKind::kSgd;
          } else if (text == "momentum") {
            *p = nn::OptimizerKind::kMomentum;
          } else if (text == "adam") {
            *p = nn::OptimizerKind::kAdam;
          } else {
            throw Error(ErrorCode::kInvalidConfig, "optimizer must be sgd, momentum or adam");
          }
        } else if constexpr (std::is_same_v<T, HistogramRange>) {
          const auto items = split_list(text);
          if (items.size() != 2) throw Error(ErrorCode::kInvalidConfig, key + " expects lo,hi");
          *p = {parse_double(key, items[0]), parse_double(key, items[1])};
        } else {
          *p = text;
        }
      },
      target);
}

std::string render(Target target) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, int>) {
          return std::to_string(*p);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(*p);
        } else if constexpr (std::is_same_v<T, bool>) {
          return *p ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::vector<double>> ||
                             std::is_same_v<T, std::vector<std::string>>) {
          return join(*p);
        } else if constexpr (std::is_same_v<T, nn::AttentionKind>) {
          return *p == nn::AttentionKind::kDifferential ? "differential" : "standard";
        } else if constexpr (std::is_same_v<T, nn::OptimizerKind>) {
          return *p == nn::OptimizerKind::kSgd ? "sgd"
                 : *p == nn::OptimizerKind::kMomentum ? "momentum" : "adam";
        } else if constexpr (std::is_same_v<T, HistogramRange>) {
          return format_double(p->lo) + "," + format_double(p->hi);
        } else {
          return *p;
        }
      },
      target);
}

void check(const PipelineConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  const SynthConfig& s = c.synth;
  if (s.n_scenes < 1 || s.n_maps < 1) fail("n_scenes and n_maps must be positive");
  if (s.lanes < 1) fail("lanes must be positive");
  if (!(s.map_size > 0.0)) fail("map_size must be positive");
  if (s.agents_min < 1 || s.agents_max < s.agents_min) fail("agents_min/agents_max");
  if (s.speed_min < 0.0 || s.speed_max < s.speed_min) fail("speed_min/speed_max");
  if (s.shapes.empty()) fail("shapes must list at least one template");
  for (const auto& shape : s.shapes) {
    if (shape != "straight" && shape != "arc" && shape != "merge") {
      fail("unknown lane shape '" + shape + "'");
    }
  }
  if (s.agent_types < 1 || s.agent_types > c.model.agent_types) fail("type_count");
  if (c.model.width < 2 || c.model.layers < 0) fail("width/layers");
  if (c.init_train.epochs < 0 || c.traj_train.epochs < 0) fail("epochs must be >= 0");
  if (c.init_train.p_decentralized < 0.0 || c.init_train.p_decentralized > 1.0) {
    fail("p_decentralized must lie in [0, 1]");
  }
  if (c.candidates.v_grid.empty() || c.candidates.d_grid.empty()) fail("empty candidate grid");
  if (!(c.candidates.dt > 0.0) || !(c.candidates.horizon > 0.0)) fail("horizon/dt");
  if (!(c.map_token_spacing > 0.0)) fail("map_token_spacing must be positive");
  if (c.sampling.guidance_strength < 0.0) fail("guidance_strength must be >= 0");
  if (c.histograms.bins < 1) fail("hist_bins must be positive");
}

}  // namespace

PipelineConfig::PipelineConfig() {
  model.m2a_radius = 0.2;
  init_train.optimizer = nn::OptimizerKind::kAdam;
  init_train.epochs = 2000;
  init_train.batch_size = 20;
  init_train.lr = 2e-3;
  init_train.cosine_decay = true;
  traj_train = init_train;
  traj_train.epochs = 1000;
}

KeyValues KeyValues::parse(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::kParse, "config line " + std::to_string(lineno) + ": empty key");
    }
    kv.entries_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParse, "cannot read config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string KeyValues::get(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValues::get(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_double(key, it->second);
}

int KeyValues::get(const std::string& key, int fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_int(key, it->second);
}

bool KeyValues::get(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_bool(key, it->second);
}

std::vector<double> KeyValues::get(const std::string& key,
                                   const std::vector<double>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(it->second)) out.push_back(parse_double(key, item));
  return out;
}

PipelineConfig PipelineConfig::from(const KeyValues& kv) {
  PipelineConfig c;
  std::string schedule_kind = "linear";
  const auto table = bindings(c, schedule_kind);
  for (const auto& [key, value] : kv.entries()) {
    bool found = false;
    for (const auto& b : table) {
      if (key == b.key) {
        assign(key, value, b.target);
        found = true;
        break;
      }
    }
    if (!found) throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
  }
  if (schedule_kind != "linear") {
    throw Error(ErrorCode::kInvalidConfig, "only the linear schedule is supported");
  }
  check(c);
  return c;
}

KeyValues PipelineConfig::to_key_values() const {
  PipelineConfig copy = *this;
  std::string schedule_kind = "linear";
  KeyValues kv;
  for (const auto& b : bindings(copy, schedule_kind)) kv.set(b.key, render(b.target));
  return kv;
}

}  // namespace scenegen
