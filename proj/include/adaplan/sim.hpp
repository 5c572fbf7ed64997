#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adaplan/fd_planner.hpp"
#include "adaplan/reference.hpp"
#include "adaplan/sa_planner.hpp"
#include "adaplan/switcher.hpp"

namespace adaplan {

/// Constant-speed lane follower on the track centerline.
struct ObstacleSpec {
  double start_arc = 0.0;
  double lane_offset = 0.0;
  double speed = 0.0;
  double length = 4.5;
  double width = 2.0;
};

struct Scenario {
  std::string name = "scenario";
  Track track;
  ReferencePlan reference;
  double ego_start_arc = 0.0;
  double ego_lane = 0.0;
  double ego_speed = 10.0;
  std::vector<ObstacleSpec> obstacles;
  double max_time = 60.0;
  double goal_arc = 0.0;  // centerline progress that ends the episode
  /// End as soon as the ego leads every obstacle by this much (<= 0: off).
  double pass_margin = 0.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct Rates {
  double control_hz = 100.0;
  double plan_hz = 10.0;
  SwitchTriggerPolicy policy;
  double sensing_radius = 50.0;

  void Validate() const;
};

/// Operation frequency of each planner. The distance travelled between two
/// cycles is bounded by travel_per_cycle, so a planner running at f Hz has
/// its reference speed capped at f * travel_per_cycle.
struct PlannerTiming {
  double fd_hz = 100.0;
  double sa_hz = 20.0;
  double travel_per_cycle = 0.75;

  double FdCap() const { return fd_hz * travel_per_cycle; }
  double SaCap() const { return sa_hz * travel_per_cycle; }
  void Validate() const;
};

enum class StackMode { kSwitched, kFdOnly, kSaOnly };
std::string ToString(StackMode m);
StackMode ParseStackMode(const std::string& s);

struct PlannerStack {
  StackMode mode = StackMode::kSwitched;
  VehicleParams params;
  ActionBounds bounds;
  FdConfig fd;
  SaConfig sa;
  SwitcherConfig switcher;
  ExperienceDatabase experience;
  PlannerTiming timing;
};

struct ObstacleState {
  ObstacleSpec spec;
  double arc = 0.0;  // unwrapped
  VehicleState pose;
  Vec2 velocity = Vec2::Zero();
  ConvexPolytope shape = RectanglePolytope(4.5, 2.0);
};

struct WorldState {
  double time = 0.0;
  VehicleState ego;
  ControlInput input;
  double ego_progress = 0.0;  // unwrapped centerline arc
  double ego_arc_hint = 0.0;
  double distance_travelled = 0.0;
  std::vector<ObstacleState> obstacles;
  std::vector<bool> in_contact;
  std::vector<bool> detected;
  int collisions = 0;
  double min_distance = std::numeric_limits<double>::infinity();
};

/// Static parts of the world and the substep integrator.
class World {
 public:
  World(const Scenario& scenario, const VehicleParams& params);

  WorldState Initial() const;
  /// Advances ego and obstacles by dt. A collision is counted when an
  /// ego/obstacle pair starts touching.
  WorldState Step(const WorldState& world, const ControlInput& input, double dt) const;
  /// Obstacle predictions for the planners.
  std::vector<ObstacleForecast> Forecasts(const WorldState& world) const;
  /// Ids of obstacles within the sensing radius.
  std::vector<bool> Detect(const WorldState& world, double radius) const;

  const Polyline& centerline() const { return centerline_; }
  const ConvexPolytope& footprint() const { return footprint_; }

 private:
  ObstacleState Place(const ObstacleSpec& spec, double arc) const;
  void Touch(WorldState& w) const;

  Polyline centerline_;
  VehicleParams params_;
  ConvexPolytope footprint_;
  std::vector<ObstacleSpec> specs_;
  double ego_start_arc_;
  double ego_lane_;
  double ego_speed_;
};

struct ModeSample {
  double time = 0.0;
  int beta = 0;
  double gamma = 0.0;
};

struct EpisodeMetrics {
  bool completed = false;
  bool failed = false;
  double completion_time = 0.0;
  double avg_speed_kmh = 0.0;
  double max_speed_kmh = 0.0;
  int collisions = 0;
  bool overtake_success = false;
  double min_distance = std::numeric_limits<double>::infinity();
  int fd_plans = 0;
  int fd_infeasible = 0;
  int sa_plans = 0;
  int sa_feasible = 0;
  int sa_certificate_violations = 0;
  double sa_min_certified = std::numeric_limits<double>::infinity();
  int switch_decisions = 0;
  int degraded_decisions = 0;
  int stale_decisions = 0;
  int input_violations = 0;
  std::vector<ModeSample> mode_trace;  // one sample per plan cycle
};

/// Optional sinks. Null members are skipped.
struct EpisodeOutputs {
  std::ostream* step_log = nullptr;      // delimited, one row per control step
  std::ostream* decision_log = nullptr;  // one JSON object per switch decision
};

EpisodeMetrics RunEpisode(const Scenario& scenario, const PlannerStack& stack, const Rates& rates,
                          const EpisodeOutputs& outputs = {});

nlohmann::json MetricsToJson(const EpisodeMetrics& m, bool include_trace = false);

// ---------------------------------------------------------------- studies

struct OvertakeStudyConfig {
  std::vector<int> densities{1, 2, 3, 4, 5};
  int trials = 20;
  std::vector<StackMode> modes{StackMode::kFdOnly, StackMode::kSaOnly, StackMode::kSwitched};
  std::uint64_t seed = 1;
  double road_length = 900.0;
  double half_width = 5.25;
  std::vector<double> lanes{-3.5, 0.0, 3.5};
  double ego_speed = 16.0;
  double first_gap = 30.0;
  double spacing = 22.0;    // mean arc spacing between consecutive obstacles
  double jitter_arc = 6.0;  // +- uniform
  double speed_min = 7.0;
  double speed_max = 11.0;
  double lane_jitter = 0.3; // +- uniform lateral wobble around the lane centre
  double max_time = 40.0;
  double pass_margin = 10.0;

  void Validate() const;
};

Scenario MakeOvertakeScenario(const OvertakeStudyConfig& config, const ReferencePlan& reference,
                              const Track& track, int density, std::uint64_t seed);

struct OvertakeRow {
  StackMode mode = StackMode::kFdOnly;
  int density = 0;
  int trials = 0;
  int successes = 0;
  int collisions = 0;
  double rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

/// Trial seeds are derived from (config.seed, density, trial) only, so each
/// row is independent of the others.
std::vector<OvertakeRow> OvertakeStudy(const OvertakeStudyConfig& config, const PlannerStack& base,
                                       const Rates& rates,
                                       std::vector<EpisodeMetrics>* trials_out = nullptr);

struct LapStudyConfig {
  int obstacle_count = 10;
  int trials = 10;
  std::uint64_t seed = 1;
  std::vector<double> lanes{-3.5, 0.0, 3.5};
  double speed_min = 8.0;
  double speed_max = 13.0;
  double ego_speed = 10.0;
  double max_time = 200.0;
  double clear_start = 40.0;  // no obstacle within this arc of the start line

  void Validate() const;
};

Scenario MakeLapScenario(const LapStudyConfig& config, const Track& track,
                         const ReferencePlan& reference, int obstacle_count, std::uint64_t seed);

struct LapRow {
  std::string config;  // optimistic | switched | sa-only | fd-only
  EpisodeMetrics best;
  int completed_trials = 0;
  int total_collisions = 0;  // over all trials
};

/// Best-of-trials per configuration. With obstacle_count = 0 only the
/// optimistic row is produced.
std::vector<LapRow> LapStudy(const LapStudyConfig& config, const Track& track,
                             const ReferencePlan& reference, const PlannerStack& base,
                             const Rates& rates);

/// Fixed-precision delimited tables.
std::string OvertakeTable(const std::vector<OvertakeRow>& rows);
std::string LapTable(const std::vector<LapRow>& rows);
/// (density, success rate) series per mode.
std::string OvertakePlotData(const std::vector<OvertakeRow>& rows);
std::string LapPlotData(const std::vector<LapRow>& rows);

/// Per-trial seed mixing (splitmix64).
std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b);

}  // namespace adaplan
