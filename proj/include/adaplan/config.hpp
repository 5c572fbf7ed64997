#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "adaplan/sim.hpp"

namespace adaplan {

/// Bad input file or field. The message starts with the file:line or the
/// dotted field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain-text track:
///   # comment
///   half_width 5.25
///   closed true
///   x y            (one centerline point per line)
Track ParseTrackText(const std::string& text, const std::string& source = "<track>");
Track LoadTrackFile(const std::string& path);
std::string TrackToText(const Track& track);

/// "a.b.c=value". The value is read as JSON when it parses, else as a string.
void ApplyOverride(nlohmann::json& root, const std::string& assignment);

struct ScenarioConfig {
  double ego_start_arc = 0.0;
  double ego_lane = 0.0;
  double ego_speed = 10.0;
  std::vector<ObstacleSpec> obstacles;
  double max_time = 60.0;
  double goal_arc = 0.0;  // 0: one lap when closed, the full length minus 40 m otherwise
  double pass_margin = 0.0;
};

struct RunConfig {
  std::string track_path;
  std::string reference_path;  // optional; generated from the track when empty
  std::string labeled_scenes_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  StackMode mode = StackMode::kSwitched;
  VehicleParams vehicle;
  ActionBounds bounds;
  ReferenceOptions reference;
  FdConfig fd;
  SaConfig sa;
  SwitcherConfig switcher;
  PlannerTiming timing;
  Rates rates;
  ScenarioConfig scenario;
  OvertakeStudyConfig overtake;
  LapStudyConfig lap;

  void Validate() const;
};

/// Strict: unknown keys and wrong types throw ConfigError naming the field.
/// Relative paths are resolved against base_dir.
RunConfig ParseRunConfig(const nlohmann::json& j, const std::string& base_dir = ".");
nlohmann::json RunConfigToJson(const RunConfig& c);

/// Reads, applies overrides in order and parses.
RunConfig LoadRunConfig(const std::string& path, const std::vector<std::string>& overrides = {});

PlannerStack MakeStack(const RunConfig& c);
/// Reference from reference_path, or generated from the track.
ReferencePlan ResolveReference(const RunConfig& c, const Track& track);
Scenario MakeScenario(const RunConfig& c, const Track& track, const ReferencePlan& reference);

}  // namespace adaplan
