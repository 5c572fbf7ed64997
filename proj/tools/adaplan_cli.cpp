// adaplan command line: gen-reference, run, study, eval-switcher.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adaplan/config.hpp"

namespace fs = std::filesystem;
using namespace adaplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitEpisode = 3;
constexpr int kExitNumeric = 4;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out_dir;
  long long seed = -1;
};

void AddCommon(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "JSON run configuration");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  app->add_option("--override", c.overrides, "key.path=value, applied in order")
      ->take_all()
      ->allow_extra_args(false);
  app->add_option("--out-dir", c.out_dir, "output directory (overrides out_dir)");
  app->add_option("--seed", c.seed, "seed (overrides seed)")->check(CLI::NonNegativeNumber);
}

RunConfig Load(const Common& c) {
  std::vector<std::string> overrides = c.overrides;
  if (!c.out_dir.empty()) overrides.push_back("out_dir=" + nlohmann::json(c.out_dir).dump());
  if (c.seed >= 0) overrides.push_back("seed=" + std::to_string(c.seed));
  return LoadRunConfig(c.config, overrides);
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path.string() + ": cannot write");
  out << text;
}

fs::path PrepareOutDir(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  WriteText(dir / "config.resolved.json", RunConfigToJson(cfg).dump(2) + "\n");
  return dir;
}

std::string SegmentSummary(const Track& track, const ReferencePlan& plan) {
  std::ostringstream os;
  const auto segments = SegmentTrack(track, 0.01);
  const size_t n = track.centerline.size();
  os << "segments: " << segments.size() << "\n";
  for (const auto& s : segments) {
    os << "  " << (s.kind == SegmentKind::kCurve ? "curve   " : "straight") << " [" << s.begin
       << ", " << s.end << ") of " << n << " points, mean curvature " << s.mean_curvature
       << "\n";
  }
  double vmin = plan.v_max;
  for (double v : plan.speeds) vmin = std::min(vmin, v);
  os << "reference: " << plan.size() << " waypoints, length " << plan.Length()
     << " m, speed range [" << vmin << ", " << plan.v_max << "] m/s\n";
  return os.str();
}

int CmdGenReference(const std::string& track_path, const Common& common, std::string output) {
  VehicleParams params;
  ActionBounds bounds;
  ReferenceOptions options;
  fs::path out_dir = common.out_dir.empty() ? fs::path("out") : fs::path(common.out_dir);
  if (!common.config.empty()) {
    const RunConfig cfg = Load(common);
    params = cfg.vehicle;
    bounds = cfg.bounds;
    options = cfg.reference;
    out_dir = cfg.out_dir;
  }
  const Track track = LoadTrackFile(track_path);
  const ReferencePlan plan = GenerateReference(track, params, bounds, options);
  if (output.empty()) {
    fs::create_directories(out_dir);
    output = (out_dir / "reference.json").string();
  }
  WriteText(output, ReferenceToJson(plan).dump(1) + "\n");
  std::cout << SegmentSummary(track, plan) << "wrote " << output << "\n";
  return kExitOk;
}

int CmdRun(const Common& common) {
  const RunConfig cfg = Load(common);
  const fs::path dir = PrepareOutDir(cfg);
  const Track track = LoadTrackFile(cfg.track_path);
  const ReferencePlan reference = ResolveReference(cfg, track);
  const Scenario scenario = MakeScenario(cfg, track, reference);
  const PlannerStack stack = MakeStack(cfg);

  std::ofstream steps(dir / "steps.csv", std::ios::binary);
  std::ofstream decisions(dir / "decisions.jsonl", std::ios::binary);
  const EpisodeMetrics m = RunEpisode(scenario, stack, cfg.rates, {&steps, &decisions});
  nlohmann::json j = MetricsToJson(m, true);
  j["seed"] = cfg.seed;
  j["mode"] = ToString(cfg.mode);
  WriteText(dir / "metrics.json", j.dump(2) + "\n");

  std::cout << "completed=" << (m.completed ? 1 : 0) << " time=" << m.completion_time
            << " s avg=" << m.avg_speed_kmh << " km/h max=" << m.max_speed_kmh
            << " km/h collisions=" << m.collisions << "\n";
  if (m.failed) {
    std::cerr << "error: planner numeric failure, vehicle brought to a stop\n";
    return kExitNumeric;
  }
  if (!m.completed) {
    std::cerr << "episode did not reach the goal within " << scenario.max_time << " s\n";
    return kExitEpisode;
  }
  return kExitOk;
}

int CmdStudy(const std::string& which, const Common& common) {
  const RunConfig cfg = Load(common);
  const fs::path dir = PrepareOutDir(cfg);
  const PlannerStack stack = MakeStack(cfg);
  std::string table;
  std::string plot;
  std::ostringstream trials;
  if (which == "overtake") {
    std::vector<EpisodeMetrics> per_trial;
    const auto rows = OvertakeStudy(cfg.overtake, stack, cfg.rates, &per_trial);
    table = OvertakeTable(rows);
    plot = OvertakePlotData(rows);
    size_t idx = 0;
    for (const auto& r : rows) {
      for (int t = 0; t < r.trials; ++t, ++idx) {
        nlohmann::json j = MetricsToJson(per_trial[idx]);
        j["mode"] = ToString(r.mode);
        j["density"] = r.density;
        j["trial"] = t;
        trials << j.dump() << "\n";
      }
    }
  } else {
    const Track track = LoadTrackFile(cfg.track_path);
    if (!track.closed) throw ConfigError("track: lap study needs a closed track");
    const ReferencePlan reference = ResolveReference(cfg, track);
    const auto rows = LapStudy(cfg.lap, track, reference, stack, cfg.rates);
    table = LapTable(rows);
    plot = LapPlotData(rows);
    for (const auto& r : rows) {
      nlohmann::json j = MetricsToJson(r.best);
      j["config"] = r.config;
      j["completed_trials"] = r.completed_trials;
      j["total_collisions"] = r.total_collisions;
      trials << j.dump() << "\n";
    }
  }
  WriteText(dir / (which + "_table.csv"), table);
  WriteText(dir / (which + "_plot.csv"), plot);
  WriteText(dir / (which + "_trials.jsonl"), trials.str());
  std::cout << table;
  return kExitOk;
}

int CmdEvalSwitcher(const Common& common, std::string scenes_path) {
  const RunConfig cfg = Load(common);
  const fs::path dir = PrepareOutDir(cfg);
  if (scenes_path.empty()) scenes_path = cfg.labeled_scenes_path;
  if (scenes_path.empty()) throw ConfigError("labeled_scenes: required for eval-switcher");
  std::ifstream in(scenes_path);
  if (!in) throw ConfigError(scenes_path + ": cannot open file");
  std::vector<LabeledScene> scenes;
  try {
    scenes = LabeledScenesFromJson(nlohmann::json::parse(in));
  } catch (const std::exception& e) {
    throw ConfigError(scenes_path + ": " + e.what());
  }
  const PlannerStack stack = MakeStack(cfg);
  const auto& th = cfg.switcher.thresholds;

  std::ostringstream report;
  report << "backend,k,precision,degraded\n";
  auto row = [&](const std::string& name, int k, double precision, int degraded) {
    report << name << ',' << k << ',' << std::fixed << std::setprecision(4) << precision << ','
           << degraded << '\n';
  };

  row("rule", 0, EvaluatePrecision([&](const SceneDescription& s) { return RuleBasedSwitch(s, th); },
                                   scenes),
      0);

  auto run_llm = [&](CompletionEndpoint& ep, int k, int& degraded) {
    degraded = 0;
    return EvaluatePrecision(
        [&](const SceneDescription& s) {
          const SwitchResult r = LlmSwitch(s, stack.experience, k, ep, cfg.switcher.timeout_s, th);
          if (r.degraded) ++degraded;
          return r.command;
        },
        scenes);
  };
  EchoEndpoint echo;
  std::vector<int> ks = {cfg.switcher.k};
  if (cfg.switcher.k != 0) ks.push_back(0);
  for (int k : ks) {
    int degraded = 0;
    const double p = run_llm(echo, k, degraded);
    row("mock-echo", k, p, degraded);
  }
  if (cfg.switcher.mode == "endpoint") {
    HttpCompletionEndpoint http(cfg.switcher.endpoint);
    int degraded = 0;
    const double p = run_llm(http, cfg.switcher.k, degraded);
    if (degraded == static_cast<int>(scenes.size())) {
      std::cerr << "warning: endpoint " << cfg.switcher.endpoint.url
                << " gave no usable replies; report covers offline backends only\n";
    } else {
      row("endpoint", cfg.switcher.k, p, degraded);
    }
  }
  WriteText(dir / "switcher_precision.csv", report.str());
  std::cout << report.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaplan: adaptive FD/SA motion planning simulator"};
  app.require_subcommand(1);

  Common gen_common, run_common, study_common, eval_common;
  std::string track_path, reference_out, study_kind, scenes_path;

  auto* gen = app.add_subcommand("gen-reference", "generate a reference plan from a track file");
  gen->add_option("track", track_path, "track file")->required();
  gen->add_option("-o,--output", reference_out, "output file (default <out-dir>/reference.json)");
  AddCommon(gen, gen_common, false);

  auto* run = app.add_subcommand("run", "run one episode");
  AddCommon(run, run_common, true);

  auto* study = app.add_subcommand("study", "run the overtake or lap study");
  study->add_option("kind", study_kind, "overtake | lap")
      ->required()
      ->check(CLI::IsMember({"overtake", "lap"}));
  AddCommon(study, study_common, true);

  auto* eval = app.add_subcommand("eval-switcher", "switcher precision on labeled scenes");
  eval->add_option("--scenes", scenes_path, "labeled scenes (default: labeled_scenes in config)");
  AddCommon(eval, eval_common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*gen) return CmdGenReference(track_path, gen_common, reference_out);
    if (*run) return CmdRun(run_common);
    if (*study) return CmdStudy(study_kind, study_common);
    if (*eval) return CmdEvalSwitcher(eval_common, scenes_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const GenerationFailure& e) {
    std::cerr << "error: reference generation failed: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericFailure& e) {
    std::cerr << "error: numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
