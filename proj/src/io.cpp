#include "scenegen/io.hpp"

#include <fstream>
#include <sstream>

namespace scenegen {

namespace {

constexpr int kCheckpointVersion = 1;

template <typename F>
auto parse_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

Json points_to_json(const Points2& pts) {
  Json arr = Json::array();
  for (Eigen::Index k = 0; k < pts.rows(); ++k) arr.push_back({pts(k, 0), pts(k, 1)});
  return arr;
}

Points2 points_from_json(const Json& arr) {
  Points2 pts(static_cast<Eigen::Index>(arr.size()), 2);
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const auto& p = arr.at(k);
    if (p.size() != 2) throw Error(ErrorCode::kParse, "points must be [x, y] pairs");
    pts(static_cast<Eigen::Index>(k), 0) = p.at(0).get<double>();
    pts(static_cast<Eigen::Index>(k), 1) = p.at(1).get<double>();
  }
  return pts;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const Json& j) {
  const auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Eigen::RowVectorXd r = m.row(i);
    rows.push_back(std::vector<double>(r.data(), r.data() + r.size()));
  }
  return rows;
}

Json denoiser_config_json(const nn::DenoiserConfig& c) {
  return {{"width", c.width},
          {"layers", c.layers},
          {"lambda_init", c.lambda_init},
          {"m2a_radius", c.m2a_radius},
          {"agent_types", c.agent_types},
          {"ff_mult", c.ff_mult},
          {"latent_dim", c.latent_dim},
          {"attention", c.attention == nn::AttentionKind::kDifferential ? "differential" : "standard"}};
}

nn::DenoiserConfig denoiser_config_from_json(const Json& j) {
  nn::DenoiserConfig c;
  c.width = j.at("width").get<int>();
  c.layers = j.at("layers").get<int>();
  c.lambda_init = j.at("lambda_init").get<double>();
  c.m2a_radius = j.at("m2a_radius").get<double>();
  c.agent_types = j.at("agent_types").get<int>();
  c.ff_mult = j.at("ff_mult").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  const auto kind = j.at("attention").get<std::string>();
  if (kind != "differential" && kind != "standard") {
    throw Error(ErrorCode::kParse, "unknown attention kind '" + kind + "'");
  }
  c.attention = kind == "differential" ? nn::AttentionKind::kDifferential
                                       : nn::AttentionKind::kStandard;
  return c;
}

// Parameters as a shape manifest plus row-major data.
Json params_json(const nn::ParameterSet<double>& ps) {
  Json arr = Json::array();
  for (int i = 0; i < ps.size(); ++i) {
    const auto& v = ps.value(i);
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(v.size()));
    for (Eigen::Index r = 0; r < v.rows(); ++r)
      for (Eigen::Index c = 0; c < v.cols(); ++c) data.push_back(v(r, c));
    arr.push_back({{"name", ps.name(i)}, {"rows", v.rows()}, {"cols", v.cols()}, {"data", data}});
  }
  return arr;
}

void load_params(nn::ParameterSet<double>& ps, const Json& arr) {
  if (static_cast<int>(arr.size()) != ps.size()) {
    throw Error(ErrorCode::kShapeMismatch, "checkpoint parameter count differs from the model");
  }
  for (const auto& entry : arr) {
    const std::string name = entry.at("name").get<std::string>();
    if (!ps.contains(name)) throw Error(ErrorCode::kShapeMismatch, "unexpected parameter " + name);
    auto& v = ps[name];
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    const auto data = entry.at("data").get<std::vector<double>>();
    if (rows != v.rows() || cols != v.cols() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw Error(ErrorCode::kShapeMismatch, "parameter " + name + " has the wrong shape");
    }
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) v(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  }
}

Json checkpoint_json(const char* kind, const nn::DenoiserConfig& cfg,
                     const nn::ParameterSet<double>& ps, const SpeedRange& speed,
                     double token_spacing) {
  return {{"format", "scenegen-denoiser"},
          {"version", kCheckpointVersion},
          {"kind", kind},
          {"config", denoiser_config_json(cfg)},
          {"speed_range", {speed.min, speed.max}},
          {"map_token_spacing", token_spacing},
          {"params", params_json(ps)}};
}

void check_checkpoint(const Json& j, const char* kind) {
  if (j.value("format", "") != "scenegen-denoiser") {
    throw Error(ErrorCode::kParse, "not a denoiser checkpoint");
  }
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw Error(ErrorCode::kParse, "unsupported checkpoint version");
  }
  if (j.at("kind").get<std::string>() != kind) {
    throw Error(ErrorCode::kParse, std::string("expected a ") + kind + " checkpoint");
  }
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kParse, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kParse, "write to '" + path + "' failed");
}

Json load_json(const std::string& path) {
  const std::string text = read_file(path);
  return parse_guard(path.c_str(), [&] { return Json::parse(text); });
}

void save_json(const std::string& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

Json to_json(const VectorMap& map) {
  Json lanes = Json::array();
  for (const auto& lane : map.lanes) lanes.push_back({{"points", points_to_json(lane.points)}});
  return {{"lanes", lanes},
          {"bounds", {map.bounds.xmin, map.bounds.ymin, map.bounds.xmax, map.bounds.ymax}}};
}

VectorMap map_from_json(const Json& j) {
  return parse_guard("map", [&] {
    VectorMap map;
    for (const auto& lane : j.at("lanes")) {
      map.lanes.push_back(arclength_parameterize(points_from_json(lane.at("points"))));
    }
    if (j.contains("bounds")) {
      const auto b = j.at("bounds").get<std::vector<double>>();
      if (b.size() != 4) throw Error(ErrorCode::kParse, "bounds must be [xmin, ymin, xmax, ymax]");
      map.bounds = {b[0], b[1], b[2], b[3]};
    } else if (!map.lanes.empty()) {
      map.bounds = lane_bounds(map.lanes);
    }
    validate_map(map);
    return map;
  });
}

Json to_json(const Scene& scene) {
  Json agents = Json::array();
  for (const auto& a : scene.agents) {
    agents.push_back({{"x", a.x}, {"y", a.y}, {"theta", a.theta}, {"v", a.v}, {"type", a.type}});
  }
  return {{"map_ref", scene.map_ref}, {"agents", agents}};
}

Scene scene_from_json(const Json& j) {
  return parse_guard("scene", [&] {
    Scene scene;
    scene.map_ref = j.value("map_ref", 0);
    for (const auto& a : j.at("agents")) {
      scene.agents.push_back({a.at("x").get<double>(), a.at("y").get<double>(),
                              wrap_angle(a.at("theta").get<double>()), a.at("v").get<double>(),
                              a.value("type", 0)});
    }
    return scene;
  });
}

Json to_json(const Scenario& sc) {
  Json j = to_json(sc.scene);
  Json trajs = Json::array();
  for (const auto& tr : sc.trajectories) trajs.push_back(points_to_json(tr));
  j["trajectories"] = trajs;
  j["provenance"] = sc.provenance;
  j["seed"] = sc.seed;
  return j;
}

Scenario scenario_from_json(const Json& j) {
  return parse_guard("scenario", [&] {
    Scenario sc;
    sc.scene = scene_from_json(j);
    if (j.contains("trajectories")) {
      for (const auto& tr : j.at("trajectories")) sc.trajectories.push_back(points_from_json(tr));
    }
    if (!sc.trajectories.empty() && sc.trajectories.size() != sc.scene.agents.size()) {
      throw Error(ErrorCode::kShapeMismatch, "one trajectory per agent required");
    }
    sc.provenance = j.value("provenance", "generated");
    sc.seed = j.value("seed", std::uint64_t{0});
    return sc;
  });
}

Json to_json(const Dataset& data) {
  Json maps = Json::array();
  for (const auto& m : data.maps) maps.push_back(to_json(m));
  Json scenarios = Json::array();
  for (const auto& sc : data.scenarios) scenarios.push_back(to_json(sc));
  return {{"maps", maps}, {"scenarios", scenarios}};
}

Dataset dataset_from_json(const Json& j) {
  return parse_guard("dataset", [&] {
    Dataset data;
    if (j.contains("lanes")) {
      data.maps.push_back(map_from_json(j));
      return data;
    }
    for (const auto& m : j.at("maps")) data.maps.push_back(map_from_json(m));
    if (j.contains("scenarios")) {
      for (const auto& sc : j.at("scenarios")) {
        data.scenarios.push_back(scenario_from_json(sc));
        const int ref = data.scenarios.back().scene.map_ref;
        if (ref < 0 || ref >= static_cast<int>(data.maps.size())) {
          throw Error(ErrorCode::kShapeMismatch, "scenario refers to a missing map");
        }
      }
    }
    return data;
  });
}

Json to_json(const PcaModel& model) {
  return {{"mean", vector_to_json(model.mean)},
          {"basis", matrix_to_json(model.basis)},
          {"explained_variance", vector_to_json(model.explained_variance)},
          {"residual_bound", model.residual_bound},
          {"flatten_order", kFlattenOrder}};
}

PcaModel pca_from_json(const Json& j) {
  return parse_guard("codec", [&] {
    if (j.at("flatten_order").get<std::string>() != kFlattenOrder) {
      throw Error(ErrorCode::kParse, "unsupported flatten order");
    }
    PcaModel m;
    m.mean = vector_from_json(j.at("mean"));
    const auto& rows = j.at("basis");
    m.basis.resize(static_cast<Eigen::Index>(rows.size()), m.mean.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Eigen::VectorXd r = vector_from_json(rows.at(i));
      if (r.size() != m.mean.size()) throw Error(ErrorCode::kShapeMismatch, "basis row width");
      m.basis.row(static_cast<Eigen::Index>(i)) = r.transpose();
    }
    m.explained_variance = vector_from_json(j.at("explained_variance"));
    if (m.explained_variance.size() != m.basis.rows()) {
      throw Error(ErrorCode::kShapeMismatch, "explained_variance length");
    }
    m.residual_bound = j.at("residual_bound").get<double>();
    return m;
  });
}

Json candidates_to_json(const std::vector<CandidateSet>& per_agent) {
  Json out = Json::array();
  for (const auto& set : per_agent) {
    Json arr = Json::array();
    for (const auto& c : set) {
      arr.push_back({{"v", c.v}, {"d", c.d}, {"lane", c.lane}, {"xy", points_to_json(c.xy)}});
    }
    out.push_back(arr);
  }
  return out;
}

Json to_json(const MetricReport& report) {
  Json hist = Json::object();
  for (const auto& [name, h] : report.histograms) {
    hist[name] = {{"edges", h.edges}, {"mass", h.mass}};
  }
  return {{"metrics", report.values}, {"histograms", hist}, {"config", report.config}};
}

Json to_json(const InitModel& model) {
  return checkpoint_json("init", model.net.config(), model.net.params(), model.speed,
                         model.token_spacing);
}

InitModel init_model_from_json(const Json& j) {
  return parse_guard("init checkpoint", [&] {
    check_checkpoint(j, "init");
    const auto speed = j.at("speed_range").get<std::vector<double>>();
    InitModel m{nn::InitDenoiser<double>(denoiser_config_from_json(j.at("config")), 0),
                {speed.at(0), speed.at(1)}, j.at("map_token_spacing").get<double>()};
    load_params(m.net.params(), j.at("params"));
    return m;
  });
}

Json to_json(const TrajModel& model) {
  return checkpoint_json("traj", model.net.config(), model.net.params(), model.speed,
                         model.token_spacing);
}

TrajModel traj_model_from_json(const Json& j) {
  return parse_guard("trajectory checkpoint", [&] {
    check_checkpoint(j, "traj");
    const auto speed = j.at("speed_range").get<std::vector<double>>();
    TrajModel m{nn::TrajDenoiser<double>(denoiser_config_from_json(j.at("config")), 0),
                {speed.at(0), speed.at(1)}, j.at("map_token_spacing").get<double>()};
    load_params(m.net.params(), j.at("params"));
    return m;
  });
}

}  // namespace scenegen
