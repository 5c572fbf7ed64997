// Writes a seeded labeled-scene set and a matching experience database.
// Labels come from the expert thresholds.
#include <array>
#include <cmath>
#include <map>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adaplan/switcher.hpp"

using namespace adaplan;

namespace {

SceneDescription RandomScene(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SceneDescription s;
  s.speed = 5.0 + 15.0 * unit(rng);
  if (unit(rng) < 0.3) {
    s.curvature_ahead = 0.012 + 0.04 * unit(rng);
    s.segment = SegmentKind::kCurve;
    s.envelope_speed = std::min(20.0, std::sqrt(5.0 / s.curvature_ahead));
  } else {
    s.envelope_speed = 20.0;
  }
  const std::array<double, 3> lanes{-3.5, 0.0, 3.5};
  const int n = static_cast<int>(rng() % 5);
  for (int i = 0; i < n; ++i) {
    ObstacleObservation o;
    o.arc_gap = -25.0 + 75.0 * unit(rng);
    o.lane_offset = lanes[rng() % 3];
    o.relative_position = {o.arc_gap, o.lane_offset};
    o.relative_speed = -8.0 + 10.0 * unit(rng);
    s.obstacles.push_back(o);
  }
  s.density = n;
  return s;
}

std::string Rationale(const SceneDescription& s, const ModeCommand& c) {
  std::ostringstream os;
  const double gap = NearestGapAhead(s);
  os << (c.c1 == PlannerMode::kSa ? "dense traffic, optimize around obstacles"
                                  : "sparse traffic, follow the fixed paths")
     << "; " << ToString(c.c2) << " at " << static_cast<int>(s.speed) << " m/s";
  if (std::isfinite(gap)) os << ", lead gap " << static_cast<int>(gap) << " m";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generate switcher evaluation data"};
  std::string scenes_out = "labeled_scenes.json";
  std::string db_out = "experience.json";
  int per_class = 10;
  std::uint64_t seed = 7;
  app.add_option("--scenes", scenes_out);
  app.add_option("--database", db_out);
  app.add_option("--per-class", per_class)->check(CLI::PositiveNumber);
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(seed);
  std::map<std::pair<int, int>, int> count;
  std::vector<LabeledScene> scenes;
  const RuleThresholds expert = ExpertThresholds();
  while (static_cast<int>(scenes.size()) < 6 * per_class) {
    const SceneDescription s = RandomScene(rng);
    const ModeCommand c = RuleBasedSwitch(s, expert);
    int& n = count[{static_cast<int>(c.c1), static_cast<int>(c.c2)}];
    if (n >= per_class) continue;
    ++n;
    scenes.push_back({s, c});
  }
  ExperienceDatabase db;
  for (size_t i = 0; i < scenes.size(); ++i) {
    db.push_back({"exp-" + std::to_string(i), SceneFeatures(scenes[i].scene), scenes[i].label,
                  Rationale(scenes[i].scene, scenes[i].label)});
  }
  std::ofstream(scenes_out) << LabeledScenesToJson(scenes).dump(1) << "\n";
  std::ofstream(db_out) << ExperienceToJson(db).dump(1) << "\n";
  std::cout << scenes.size() << " scenes, " << db.size() << " experiences\n";
  return 0;
}
