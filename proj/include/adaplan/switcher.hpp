#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adaplan/reference.hpp"
#include "adaplan/vehicle.hpp"

namespace adaplan {

enum class PlannerMode { kFd, kSa };
enum class SpeedCommand { kAcc, kKeep, kDec };

/// c = {c1, c2}.
struct ModeCommand {
  PlannerMode c1 = PlannerMode::kFd;
  SpeedCommand c2 = SpeedCommand::kKeep;

  bool operator==(const ModeCommand&) const = default;
};

/// beta = 0 runs the FD planner, 1 the SA planner. gamma is the reference
/// speed shift in m/s.
struct ModeConfig {
  int beta = 0;
  double gamma = 0.0;

  bool operator==(const ModeConfig&) const = default;
};

std::string ToString(PlannerMode m);
std::string ToString(SpeedCommand c);
std::optional<PlannerMode> ParsePlannerMode(const std::string& s);
std::optional<SpeedCommand> ParseSpeedCommand(const std::string& s);

int MapMode(PlannerMode c1);
/// acc -> +v0, keep -> 0, dec -> -v0. Throws std::invalid_argument for v0 <= 0.
double MapSpeed(SpeedCommand c2, double v0);
ModeConfig ToModeConfig(const ModeCommand& c, double v0);

/// One observed obstacle, relative to the ego vehicle.
struct ObstacleObservation {
  Vec2 relative_position = Vec2::Zero();  // ego frame
  double relative_speed = 0.0;            // along the track, obstacle minus ego
  double lane_offset = 0.0;               // signed track lateral of the obstacle
  double arc_gap = 0.0;                   // track arc from ego to obstacle
};

struct SceneDescription {
  VehicleState ego;
  double speed = 0.0;
  double ego_lateral = 0.0;
  std::vector<ObstacleObservation> obstacles;  // within the lookahead radius
  SegmentKind segment = SegmentKind::kStraight;
  double curvature_ahead = 0.0;  // largest |kappa| within the lookahead
  double envelope_speed = 0.0;   // smallest envelope speed within the lookahead
  int density = 0;

  void Validate() const;
};

struct SceneOptions {
  double radius = 50.0;           // lookahead / sensing radius, m
  double lane_half_width = 1.75;  // same-lane test for gaps
  double curve_threshold = 0.01;  // 1/m
};

/// An obstacle as the switcher sees it: center and velocity.
struct ObservedAgent {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
};

SceneDescription DescribeScene(const VehicleState& ego, double speed,
                               const std::vector<ObservedAgent>& agents,
                               const ReferenceQuery& query, const SceneOptions& options = {});

/// Nearest in-lane obstacle ahead, or +inf.
double NearestGapAhead(const SceneDescription& scene, double lane_half_width = 1.75);

inline constexpr int kFeatureCount = 6;
using FeatureVector = std::array<double, kFeatureCount>;

/// speed, envelope speed, density, nearest in-lane gap (capped), curvature
/// ahead, ego lateral.
FeatureVector SceneFeatures(const SceneDescription& scene, double gap_cap = 50.0);
const std::array<const char*, kFeatureCount>& FeatureNames();
/// Per-feature scales used by the normalized distance.
const FeatureVector& FeatureScales();
double FeatureDistance(const FeatureVector& a, const FeatureVector& b);

struct ExperienceEntry {
  std::string id;
  FeatureVector features{};
  ModeCommand command;
  std::string rationale;

  void Validate() const;
};

using ExperienceDatabase = std::vector<ExperienceEntry>;

nlohmann::json ExperienceToJson(const ExperienceDatabase& db);
ExperienceDatabase ExperienceFromJson(const nlohmann::json& j);
ExperienceDatabase LoadExperience(const std::string& path);

/// Indices of the k nearest entries, ties by insertion order. k larger than
/// the database returns all of it. k = 0 returns nothing.
std::vector<size_t> RetrieveTopK(const FeatureVector& query, const ExperienceDatabase& db, int k);

inline constexpr const char* kPromptVersion = "mode-prompt/1";
std::string BuildPrompt(const SceneDescription& scene,
                        const std::vector<const ExperienceEntry*>& retrieved);

/// Extracts {"c1": ..., "c2": ...} from free text. The first JSON object
/// that carries both keys wins.
std::optional<ModeCommand> ParseCommand(const std::string& text);

struct CompletionResponse {
  bool ok = false;
  std::string text;
  std::string error;
  double latency_s = 0.0;
};

class CompletionEndpoint {
 public:
  virtual ~CompletionEndpoint() = default;
  virtual CompletionResponse Complete(const std::string& prompt, double timeout_s) = 0;
  virtual std::string Name() const = 0;
};

/// Answers with the command of the first experience listed in the prompt.
/// Without one the reply is not a command.
class EchoEndpoint : public CompletionEndpoint {
 public:
  CompletionResponse Complete(const std::string& prompt, double timeout_s) override;
  std::string Name() const override { return "echo"; }
};

/// Wraps another endpoint with a fixed simulated latency. A latency above
/// the timeout reports a timeout without waiting.
class LatencyEndpoint : public CompletionEndpoint {
 public:
  LatencyEndpoint(std::shared_ptr<CompletionEndpoint> inner, double latency_s);
  CompletionResponse Complete(const std::string& prompt, double timeout_s) override;
  std::string Name() const override;

 private:
  std::shared_ptr<CompletionEndpoint> inner_;
  double latency_s_;
};

struct HttpEndpointConfig {
  std::string url = "http://127.0.0.1:8000/v1/completions";
  std::string model = "default";
  std::string api_key_env = "ADAPLAN_API_KEY";
  int max_tokens = 256;
};

/// Plain HTTP JSON completion request. Accepts completion-style
/// ({"choices": [{"text"}]}), chat-style ({"choices": [{"message":
/// {"content"}}]}) or {"text"} replies.
class HttpCompletionEndpoint : public CompletionEndpoint {
 public:
  explicit HttpCompletionEndpoint(HttpEndpointConfig config);
  CompletionResponse Complete(const std::string& prompt, double timeout_s) override;
  std::string Name() const override { return "endpoint"; }

 private:
  HttpEndpointConfig config_;
  std::string origin_;
  std::string path_;
};

struct RuleThresholds {
  int density_sa = 2;
  double gap_dec = 15.0;        // m
  double curve_dec = 0.02;      // 1/m
  double envelope_margin = 0.5; // m/s below the envelope counts as below
  double lane_half_width = 1.75;
};

/// Thresholds of the expert labeler. They differ from the runtime fallback
/// defaults on purpose.
RuleThresholds ExpertThresholds();

ModeCommand RuleBasedSwitch(const SceneDescription& scene, const RuleThresholds& thresholds);

struct SwitchResult {
  ModeCommand command;
  bool degraded = false;
  double latency_s = 0.0;
  std::vector<std::string> retrieved_ids;
  std::string raw_response;
  std::string error;
};

/// Retrieval, prompt, endpoint call and parse. Any failure returns the rule
/// engine's command with degraded = true.
SwitchResult LlmSwitch(const SceneDescription& scene, const ExperienceDatabase& db, int k,
                       CompletionEndpoint& endpoint, double timeout_s,
                       const RuleThresholds& fallback);

struct LabeledScene {
  SceneDescription scene;
  ModeCommand label;
};

template <typename F>
double EvaluatePrecision(F&& switch_fn, const std::vector<LabeledScene>& scenes) {
  if (scenes.empty()) throw std::invalid_argument("precision needs at least one labeled scene");
  int hits = 0;
  for (const auto& s : scenes) {
    if (switch_fn(s.scene) == s.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(scenes.size());
}

nlohmann::json SceneToJson(const SceneDescription& scene);
SceneDescription SceneFromJson(const nlohmann::json& j);
nlohmann::json LabeledScenesToJson(const std::vector<LabeledScene>& scenes);
std::vector<LabeledScene> LabeledScenesFromJson(const nlohmann::json& j);
nlohmann::json CommandToJson(const ModeCommand& c);
ModeCommand CommandFromJson(const nlohmann::json& j);

struct SwitchTriggerPolicy {
  double period = 1.0;
  bool reactive = true;

  void Validate() const;
};

bool ShouldTrigger(const SwitchTriggerPolicy& policy, double now, double last_trigger,
                   bool newly_detected_obstacle);

/// Latest-value cell. Publishing with a sequence number not above the
/// stored one is ignored, so a late reply never overwrites a newer trigger.
class ModeCell {
 public:
  struct Snapshot {
    std::uint64_t sequence = 0;
    ModeConfig config;
  };

  explicit ModeCell(ModeConfig initial = {});
  bool Publish(std::uint64_t sequence, const ModeConfig& config);
  Snapshot Read() const;

 private:
  mutable std::mutex mutex_;
  Snapshot value_;
};

struct SwitcherConfig {
  std::string mode = "rule";  // rule | mock | endpoint
  std::string database_path;
  int k = 3;
  double v0 = 2.0;
  double timeout_s = 0.5;
  double mock_latency_s = 0.0;
  RuleThresholds thresholds;
  SwitchTriggerPolicy policy;
  SceneOptions scene;
  HttpEndpointConfig endpoint;

  void Validate() const;
};

/// Backend selected by SwitcherConfig::mode.
class Switcher {
 public:
  Switcher(SwitcherConfig config, ExperienceDatabase db);

  SwitchResult Decide(const SceneDescription& scene);
  const SwitcherConfig& config() const { return config_; }
  /// Latency the decision would take in simulated time.
  double DecisionLatency() const;

 private:
  SwitcherConfig config_;
  ExperienceDatabase db_;
  std::shared_ptr<CompletionEndpoint> endpoint_;
};

/// One JSON object per line.
class DecisionLog {
 public:
  explicit DecisionLog(std::ostream* out) : out_(out) {}
  void Record(double time, std::uint64_t sequence, const SceneDescription& scene,
              const SwitchResult& result);

 private:
  std::ostream* out_;
};

}  // namespace adaplan
