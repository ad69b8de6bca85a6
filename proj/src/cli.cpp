#include "scenegen/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>

#include "scenegen/evaluate.hpp"
#include "scenegen/io.hpp"
#include "scenegen/perturbation.hpp"
#include "scenegen/render.hpp"
#include "scenegen/scenario.hpp"

namespace scenegen {

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PipelineConfig load_config(const Globals& g) {
  if (g.config.empty()) return PipelineConfig{};
  return PipelineConfig::from(KeyValues::load(g.config));
}

const std::string& require_out(const Globals& g) {
  if (g.out.empty()) throw UsageError("--out is required");
  return g.out;
}

int exit_code_for(ErrorCode code) {
  return code == ErrorCode::kNumeric ? kExitNumeric : kExitData;
}

void print_log(std::ostream& out, const char* what, const TrainResult& r) {
  out << what << ": " << r.log.steps << " steps in " << r.seconds << " s";
  if (!r.log.epoch_loss.empty()) {
    out << ", loss " << r.log.epoch_loss.front() << " -> " << r.log.epoch_loss.back();
  }
  out << "\n";
}

}  // namespace

int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Map-conditioned traffic scene and trajectory generation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--config", g.config, "Flat key = value configuration file");
  app.add_option("--out", g.out, "Output path");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");

  std::string data_path;
  auto* fit = app.add_subcommand("fit-codec", "Fit the trajectory PCA codec");
  fit->add_option("data", data_path, "Dataset JSON")->required();

  auto* tinit = app.add_subcommand("train-init", "Train the initialization denoiser");
  tinit->add_option("data", data_path, "Dataset JSON")->required();

  std::string codec_path;
  auto* ttraj = app.add_subcommand("train-traj", "Train the trajectory denoiser");
  ttraj->add_option("data", data_path, "Dataset JSON")->required();
  ttraj->add_option("--codec", codec_path, "Codec JSON")->required();

  std::string init_path;
  std::string traj_path;
  int n_agents = 0;
  int count = 0;
  int map_index = -1;
  bool no_guidance = false;
  bool init_only = false;
  auto* sample = app.add_subcommand("sample", "Sample scenarios on the dataset maps");
  sample->add_option("data", data_path, "Dataset or map JSON")->required();
  sample->add_option("--init", init_path, "Init checkpoint")->required();
  sample->add_option("--traj", traj_path, "Trajectory checkpoint");
  sample->add_option("--codec", codec_path, "Codec JSON");
  sample->add_option("--agents", n_agents, "Agents per scene (default: as in the dataset)");
  sample->add_option("--count", count, "Number of scenarios (default: one per dataset scene)");
  sample->add_option("--map-index", map_index, "Use only this map");
  sample->add_flag("--no-guidance", no_guidance, "Disable candidate guidance");
  sample->add_flag("--init-only", init_only, "Skip trajectory generation");

  std::string gt_path;
  auto* eval = app.add_subcommand("eval", "Evaluate scenarios");
  eval->add_option("scenarios", data_path, "Scenario dataset JSON")->required();
  eval->add_option("--gt", gt_path, "Reference dataset JSON");

  std::string kind = "turn";
  Perturbation pert;
  std::string in_path;
  std::string out_path;
  auto* perturb = app.add_subcommand("perturb", "Bend the lanes of a map or dataset");
  perturb->add_option("--kind", kind, "identity, turn, double_turn or ripple");
  perturb->add_option("--pivot", pert.pivot_s, "Arc length where bending starts (m)");
  perturb->add_option("--pivot2", pert.pivot2_s, "Second pivot for double_turn (m)");
  perturb->add_option("--curvature", pert.curvature, "Bend strength (1/m)");
  perturb->add_option("--amplitude", pert.amplitude, "Ripple amplitude (m)");
  perturb->add_option("--wavelength", pert.wavelength, "Ripple wavelength (m)");
  perturb->add_option("in", in_path, "Input JSON")->required();
  perturb->add_option("out", out_path, "Output JSON");

  int index = 0;
  bool with_candidates = false;
  auto* render = app.add_subcommand("render", "Draw a scenario as SVG");
  render->add_option("scenarios", data_path, "Dataset or map JSON")->required();
  render->add_option("--index", index, "Scenario index");
  render->add_flag("--candidates", with_candidates, "Overlay Frenet candidates");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const PipelineConfig cfg = load_config(g);
    if (synth->parsed()) {
      const Dataset data = synth_dataset(cfg.synth, cfg.candidates, g.seed);
      save_json(require_out(g), to_json(data));
      out << "wrote " << data.scenarios.size() << " scenes on " << data.maps.size() << " maps\n";
    } else if (fit->parsed()) {
      const std::string& dst = require_out(g);
      const PcaModel codec = fit_codec(dataset_from_json(load_json(data_path)));
      save_json(dst, to_json(codec));
      out << "codec residual bound " << codec.residual_bound << " m\n";
    } else if (tinit->parsed()) {
      const std::string& dst = require_out(g);
      const Dataset data = dataset_from_json(load_json(data_path));
      InitModel model = make_init_model(cfg, dataset_speed_range(data), g.seed);
      print_log(out, "train-init", train_init_model(model, data, cfg, g.seed));
      save_json(dst, to_json(model));
    } else if (ttraj->parsed()) {
      const std::string& dst = require_out(g);
      const Dataset data = dataset_from_json(load_json(data_path));
      const PcaModel codec = pca_from_json(load_json(codec_path));
      TrajModel model = make_traj_model(cfg, dataset_speed_range(data), g.seed);
      print_log(out, "train-traj", train_traj_model(model, data, codec, cfg, g.seed));
      save_json(dst, to_json(model));
    } else if (sample->parsed()) {
      const std::string& dst = require_out(g);
      if (!init_only && (traj_path.empty() || codec_path.empty())) {
        throw UsageError("sample needs --traj and --codec unless --init-only is given");
      }
      const Dataset data = dataset_from_json(load_json(data_path));
      const InitModel init_model = init_model_from_json(load_json(init_path));
      std::optional<TrajModel> traj_model;
      std::optional<PcaModel> codec;
      if (!init_only) {
        traj_model = traj_model_from_json(load_json(traj_path));
        codec = pca_from_json(load_json(codec_path));
      }
      if (map_index >= static_cast<int>(data.maps.size())) throw UsageError("--map-index out of range");
      const NoiseSchedule sched = schedule_from(cfg.schedule);
      const int total = count > 0 ? count
                                  : std::max<int>(1, static_cast<int>(data.scenarios.size()));
      Dataset result;
      result.maps = data.maps;
      for (int k = 0; k < total; ++k) {
        int map_ref = map_index >= 0 ? map_index : k % static_cast<int>(data.maps.size());
        int n = n_agents;
        if (map_index < 0 && k < static_cast<int>(data.scenarios.size())) {
          map_ref = data.scenarios[k].scene.map_ref;
          if (n <= 0) n = static_cast<int>(data.scenarios[k].scene.agents.size());
        }
        if (n <= 0) n = cfg.synth.agents_max;
        const std::uint64_t seed = g.seed + static_cast<std::uint64_t>(k);
        Scenario sc;
        if (init_only) {
          Rng rng(seed);
          sc.scene = sample_scene(data.maps[map_ref], n, init_model, sched, rng);
          sc.seed = seed;
        } else {
          sc = generate_scenario(data.maps[map_ref], n, init_model, *traj_model, *codec, sched,
                                 cfg, seed, !no_guidance && cfg.sampling.guidance);
        }
        sc.scene.map_ref = map_ref;
        check_finite(sc);
        result.scenarios.push_back(std::move(sc));
      }
      save_json(dst, to_json(result));
      out << "wrote " << result.scenarios.size() << " scenarios\n";
    } else if (eval->parsed()) {
      const Dataset data = dataset_from_json(load_json(data_path));
      std::optional<Dataset> gt;
      if (!gt_path.empty()) gt = dataset_from_json(load_json(gt_path));
      const MetricReport report =
          evaluate(data.scenarios, data.maps, gt ? &gt->scenarios : nullptr, cfg);
      if (g.out.empty()) {
        out << to_json(report).dump(2) << "\n";
      } else {
        save_json(g.out, to_json(report));
      }
    } else if (perturb->parsed()) {
      const std::string dst = !out_path.empty() ? out_path : require_out(g);
      pert.kind = parse_perturb_kind(kind);
      const Json j = load_json(in_path);
      if (j.contains("lanes")) {
        save_json(dst, to_json(perturb_map(map_from_json(j), pert)));
      } else {
        const Dataset data = dataset_from_json(j);
        Dataset result;
        for (const auto& m : data.maps) result.maps.push_back(perturb_map(m, pert));
        for (const auto& sc : data.scenarios) {
          Scenario moved;
          moved.scene = remap_agents(sc.scene, data.maps[sc.scene.map_ref],
                                     result.maps[sc.scene.map_ref]);
          moved.provenance = sc.provenance;
          moved.seed = sc.seed;
          result.scenarios.push_back(std::move(moved));
        }
        save_json(dst, to_json(result));
      }
      out << "wrote " << dst << "\n";
    } else if (render->parsed()) {
      const std::string& dst = require_out(g);
      const Dataset data = dataset_from_json(load_json(data_path));
      const Scenario* sc = nullptr;
      if (!data.scenarios.empty()) {
        if (index < 0 || index >= static_cast<int>(data.scenarios.size())) {
          throw UsageError("--index out of range");
        }
        sc = &data.scenarios[index];
      }
      const VectorMap& map = data.maps.at(sc != nullptr ? sc->scene.map_ref : 0);
      std::vector<CandidateSet> cands;
      if (with_candidates && sc != nullptr) cands = scene_candidates(sc->scene, map, cfg.candidates);
      write_file(dst, render_svg(map, sc, with_candidates ? &cands : nullptr));
      out << "wrote " << dst << "\n";
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return kExitOk;
}

}  // namespace scenegen
