#include "adaplan/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace adaplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMsToKmh = 3.6;

double UnitDraw(std::mt19937_64& rng) {
  // 53 random bits; independent of the standard library's distributions.
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * UnitDraw(rng);
}

std::string Num(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

struct PendingDecision {
  double time = 0.0;
  std::uint64_t sequence = 0;
  ModeConfig config;
};

}  // namespace

// -------------------------------------------------------------- configs

void Scenario::Validate() const {
  track.Validate();
  if (reference.size() < 2) throw std::invalid_argument("scenario.reference is empty");
  if (!(max_time > 0.0)) throw std::invalid_argument("scenario.max_time must be positive");
  if (!(goal_arc > 0.0)) throw std::invalid_argument("scenario.goal_arc must be positive");
  if (ego_speed < 0.0) throw std::invalid_argument("scenario.ego_speed must be >= 0");
  for (size_t i = 0; i < obstacles.size(); ++i) {
    const auto& o = obstacles[i];
    if (o.speed < 0.0 || !(o.length > 0.0) || !(o.width > 0.0)) {
      throw std::invalid_argument("scenario.obstacles[" + std::to_string(i) + "] is invalid");
    }
  }
}

void Rates::Validate() const {
  if (!(control_hz > 0.0) || !(plan_hz > 0.0)) {
    throw std::invalid_argument("rates must be positive");
  }
  if (plan_hz > control_hz) throw std::invalid_argument("rates.plan_hz must not exceed control_hz");
  if (1.0 / policy.period > plan_hz) {
    throw std::invalid_argument("rates: switch frequency must not exceed plan_hz");
  }
  const double ratio = control_hz / plan_hz;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw std::invalid_argument("rates.control_hz must be a multiple of plan_hz");
  }
  if (!(sensing_radius > 0.0)) throw std::invalid_argument("rates.sensing_radius must be positive");
  policy.Validate();
}

void PlannerTiming::Validate() const {
  if (!(fd_hz > 0.0) || !(sa_hz > 0.0) || !(travel_per_cycle > 0.0)) {
    throw std::invalid_argument("timing values must be positive");
  }
}

std::string ToString(StackMode m) {
  switch (m) {
    case StackMode::kSwitched:
      return "switched";
    case StackMode::kFdOnly:
      return "fd-only";
    case StackMode::kSaOnly:
      return "sa-only";
  }
  return "switched";
}

StackMode ParseStackMode(const std::string& s) {
  if (s == "switched") return StackMode::kSwitched;
  if (s == "fd-only") return StackMode::kFdOnly;
  if (s == "sa-only") return StackMode::kSaOnly;
  throw std::invalid_argument("unknown stack mode '" + s + "'");
}

// ---------------------------------------------------------------- world

World::World(const Scenario& scenario, const VehicleParams& params)
    : centerline_(scenario.track.Centerline()),
      params_(params),
      footprint_(Footprint(params)),
      specs_(scenario.obstacles),
      ego_start_arc_(scenario.ego_start_arc),
      ego_lane_(scenario.ego_lane),
      ego_speed_(scenario.ego_speed) {}

ObstacleState World::Place(const ObstacleSpec& spec, double arc) const {
  ObstacleState o;
  o.spec = spec;
  o.arc = arc;
  const double s = centerline_.Wrap(arc);
  const double heading = centerline_.HeadingAt(s);
  const Vec2 p = centerline_.PointAt(s) + spec.lane_offset * centerline_.LeftNormalAt(s);
  o.pose = {p.x(), p.y(), heading};
  const bool parked = !centerline_.closed() && arc >= centerline_.Length();
  o.velocity = parked ? Vec2(Vec2::Zero()) : Vec2(Vec2(std::cos(heading), std::sin(heading)) * spec.speed);
  o.shape = TransformToWorld(RectanglePolytope(spec.length, spec.width), o.pose.pose());
  return o;
}

WorldState World::Initial() const {
  WorldState w;
  const double s = centerline_.Wrap(ego_start_arc_);
  const double heading = centerline_.HeadingAt(s);
  const Vec2 p = centerline_.PointAt(s) + ego_lane_ * centerline_.LeftNormalAt(s);
  w.ego = {p.x(), p.y(), heading};
  w.input = {ego_speed_, 0.0};
  w.ego_arc_hint = s;
  for (const auto& spec : specs_) w.obstacles.push_back(Place(spec, spec.start_arc));
  w.in_contact.assign(specs_.size(), false);
  w.detected.assign(specs_.size(), false);
  Touch(w);
  return w;
}

void World::Touch(WorldState& w) const {
  const ConvexPolytope ego = TransformToWorld(footprint_, w.ego.pose());
  const double r_ego = footprint_.Radius();
  for (size_t i = 0; i < w.obstacles.size(); ++i) {
    const ObstacleState& o = w.obstacles[i];
    const double bound = (w.ego.position() - o.pose.position()).norm() - r_ego -
                         0.5 * std::hypot(o.spec.length, o.spec.width);
    double d = bound;
    if (bound < 1.0) d = MinDistance(ego, o.shape);
    w.min_distance = std::min(w.min_distance, std::max(d, 0.0));
    const bool contact = d <= 0.0;
    if (contact && !w.in_contact[i]) ++w.collisions;
    w.in_contact[i] = contact;
  }
}

WorldState World::Step(const WorldState& world, const ControlInput& input, double dt) const {
  WorldState w = world;
  VehicleParams p = params_;
  p.dt = dt;
  w.ego = StepNonlinear(world.ego, input, p);
  w.input = input;
  w.distance_travelled += std::abs(input.v) * dt;
  const auto proj = centerline_.ProjectNear(w.ego.position(), world.ego_arc_hint, 30.0);
  double delta = proj.s - world.ego_arc_hint;
  if (centerline_.closed()) {
    const double L = centerline_.Length();
    if (delta > 0.5 * L) delta -= L;
    if (delta < -0.5 * L) delta += L;
  }
  w.ego_progress += delta;
  w.ego_arc_hint = proj.s;
  for (auto& o : w.obstacles) o = Place(o.spec, o.arc + o.spec.speed * dt);
  w.time = world.time + dt;
  Touch(w);
  return w;
}

std::vector<ObstacleForecast> World::Forecasts(const WorldState& world) const {
  std::vector<ObstacleForecast> out;
  out.reserve(world.obstacles.size());
  for (const auto& o : world.obstacles) out.push_back({o.shape, o.velocity});
  return out;
}

std::vector<bool> World::Detect(const WorldState& world, double radius) const {
  std::vector<bool> d(world.obstacles.size());
  for (size_t i = 0; i < d.size(); ++i) {
    d[i] = (world.obstacles[i].pose.position() - world.ego.position()).norm() <= radius;
  }
  return d;
}

// -------------------------------------------------------------- episode

EpisodeMetrics RunEpisode(const Scenario& scenario, const PlannerStack& stack, const Rates& rates,
                          const EpisodeOutputs& outputs) {
  scenario.Validate();
  rates.Validate();
  stack.timing.Validate();
  const VehicleParams& params = stack.params;
  const ActionBounds& bounds = stack.bounds;
  const double dt_sim = 1.0 / rates.control_hz;
  const int plan_every = static_cast<int>(std::lround(rates.control_hz / rates.plan_hz));
  const int max_steps = static_cast<int>(std::ceil(scenario.max_time * rates.control_hz - 1e-9));

  World world(scenario, params);
  const ReferenceQuery query(scenario.reference);
  FdPlanner fd(stack.fd, params, bounds, scenario.track);
  SaConfig sa_config = stack.sa;
  sa_config.speed_cap = std::min(sa_config.speed_cap, stack.timing.SaCap());
  SaPlanner sa(sa_config, params, bounds, scenario.track);
  const double fd_cap = stack.timing.FdCap();

  const bool switched = stack.mode == StackMode::kSwitched;
  std::unique_ptr<Switcher> switcher;
  if (switched) switcher = std::make_unique<Switcher>(stack.switcher, stack.experience);
  DecisionLog decision_log(outputs.decision_log);

  ModeCell cell(ModeConfig{stack.mode == StackMode::kSaOnly ? 1 : 0, 0.0});
  std::deque<PendingDecision> pending;
  std::uint64_t issued = 0;
  double last_trigger = 0.0;
  bool reactive_request = false;

  EpisodeMetrics m;
  WorldState w = world.Initial();
  std::vector<bool> prev_detected = world.Detect(w, rates.sensing_radius);
  std::vector<ControlInput> plan_inputs{w.input};
  double plan_time = 0.0;
  double plan_residual = 0.0;
  int active_beta = cell.Read().config.beta;
  double active_gamma = 0.0;
  bool passed_all = scenario.obstacles.empty();
  ControlInput last_exec = w.input;
  double max_speed = w.input.v;

  if (outputs.step_log != nullptr) {
    *outputs.step_log << "time,x,y,theta,v,psi,beta,gamma,residual,min_obstacle_distance\n";
  }

  auto obstacle_distance = [&](const WorldState& s) {
    double d = kInf;
    const ConvexPolytope ego = TransformToWorld(world.footprint(), s.ego.pose());
    for (const auto& o : s.obstacles) d = std::min(d, MinDistance(ego, o.shape));
    return d;
  };

  int step = 0;
  for (; step < max_steps; ++step) {
    const double t = w.time;

    if (switched) {
      const std::vector<bool> detected = world.Detect(w, rates.sensing_radius);
      bool newly = false;
      for (size_t i = 0; i < detected.size(); ++i) newly |= detected[i] && !prev_detected[i];
      prev_detected = detected;
      const bool first = issued == 0;
      if (first || reactive_request ||
          ShouldTrigger(stack.switcher.policy, t, last_trigger, newly)) {
        std::vector<ObservedAgent> agents;
        for (const auto& o : w.obstacles) agents.push_back({o.pose.position(), o.velocity});
        const SceneDescription scene =
            DescribeScene(w.ego, w.input.v, agents, query, stack.switcher.scene);
        const SwitchResult res = switcher->Decide(scene);
        ++issued;
        ++m.switch_decisions;
        if (res.degraded) ++m.degraded_decisions;
        decision_log.Record(t, issued, scene, res);
        pending.push_back({t + switcher->DecisionLatency(), issued,
                           ToModeConfig(res.command, stack.switcher.v0)});
        last_trigger = t;
        reactive_request = false;
      }
      while (!pending.empty() && pending.front().time <= t + 1e-12) {
        const PendingDecision d = pending.front();
        pending.pop_front();
        // A reply overtaken by a newer trigger is dropped.
        if (d.sequence < issued || !cell.Publish(d.sequence, d.config)) {
          ++m.stale_decisions;
        }
      }
    }

    if (step % plan_every == 0 && !m.failed) {
      const ModeConfig mode = cell.Read().config;
      const std::vector<ObstacleForecast> forecasts = world.Forecasts(w);
      const ControlInput prev = w.input;
      try {
        PlanResult plan;
        int used_beta = mode.beta;
        if (mode.beta == 0) {
          const ReferenceSlice slice =
              query.Query(w.ego, mode.gamma, stack.fd.H, params.dt, fd_cap);
          plan = fd.Plan(w.ego, prev, slice, PredictCenters(forecasts, stack.fd.H, params.dt));
          ++m.fd_plans;
          if (!plan.feasible) {
            ++m.fd_infeasible;
            if (switched) {
              used_beta = 1;
              reactive_request = true;
            }
          }
        }
        if (used_beta == 1) {
          plan = sa.Plan(w.ego, prev, query, mode.gamma, forecasts);
          ++m.sa_plans;
          if (plan.feasible) {
            ++m.sa_feasible;
            const SaState& st = sa.last_state();
            const ShapePredictions& preds = sa.last_predictions();
            double certified = kInf;
            for (size_t i = 0; i < preds.size(); ++i) {
              for (size_t h = 0; h < plan.states.size(); ++h) {
                certified = std::min(certified,
                                     CertifiedMargin(world.footprint(), plan.states[h].pose(),
                                                     preds[i][h], st.duals.duals[i][h]));
              }
            }
            m.sa_min_certified = std::min(m.sa_min_certified, certified);
            if (certified < sa_config.d_safe - 1e-2) ++m.sa_certificate_violations;
          }
        }
        plan_inputs = plan.inputs;
        plan_time = t;
        plan_residual = plan.residual;
        active_beta = used_beta;
        active_gamma = mode.gamma;
        m.mode_trace.push_back({t, used_beta, mode.gamma});
      } catch (const NumericFailure&) {
        m.failed = true;
      }
    }

    ControlInput u;
    if (m.failed) {
      // Hold the last valid steering and brake to a stop.
      u = bounds.ClampStep({0.0, last_exec.psi}, last_exec);
      const double per_substep = dt_sim / params.dt;
      u.v = std::max(0.0, last_exec.v + bounds.a_min.v * per_substep);
      u.psi = last_exec.psi;
    } else {
      const double elapsed = t - plan_time;
      size_t idx = static_cast<size_t>(std::floor(elapsed / params.dt + 1e-9));
      idx = std::min(idx, plan_inputs.size() - 1);
      u = plan_inputs[idx];
    }

    // Executed stream against the box and the per-step rate window.
    const double tol = 1e-9;
    const bool in_box = u.v >= bounds.u_min.v - tol && u.v <= bounds.u_max.v + tol &&
                        u.psi >= bounds.u_min.psi - tol && u.psi <= bounds.u_max.psi + tol;
    const double dv = u.v - last_exec.v;
    const double dpsi = u.psi - last_exec.psi;
    const bool in_rate = dv >= bounds.a_min.v - tol && dv <= bounds.a_max.v + tol &&
                         dpsi >= bounds.a_min.psi - tol && dpsi <= bounds.a_max.psi + tol;
    if (!m.failed && (!in_box || !in_rate)) ++m.input_violations;
    last_exec = u;

    if (outputs.step_log != nullptr) {
      *outputs.step_log << Num(t, 2) << ',' << Num(w.ego.x, 4) << ',' << Num(w.ego.y, 4) << ','
                        << Num(w.ego.theta, 5) << ',' << Num(u.v, 4) << ',' << Num(u.psi, 5)
                        << ',' << active_beta << ',' << Num(active_gamma, 2) << ','
                        << Num(plan_residual, 6) << ','
                        << (w.obstacles.empty() ? std::string("inf")
                                                : Num(obstacle_distance(w), 4))
                        << '\n';
    }

    w = world.Step(w, u, dt_sim);
    max_speed = std::max(max_speed, u.v);

    const double ego_arc = scenario.ego_start_arc + w.ego_progress;
    double lead = kInf;
    for (const auto& o : w.obstacles) lead = std::min(lead, ego_arc - o.arc);
    if (!scenario.obstacles.empty() && lead > 0.0) passed_all = true;

    if (w.ego_progress >= scenario.goal_arc) {
      m.completed = true;
      ++step;
      break;
    }
    if (scenario.pass_margin > 0.0 && lead >= scenario.pass_margin) {
      m.completed = true;
      ++step;
      break;
    }
    if (m.failed && u.v <= 0.0) {
      ++step;
      break;
    }
  }

  m.completion_time = w.time;
  m.collisions = w.collisions;
  m.min_distance = w.min_distance;
  m.max_speed_kmh = max_speed * kMsToKmh;
  m.avg_speed_kmh = w.time > 0.0 ? w.distance_travelled / w.time * kMsToKmh : 0.0;
  m.overtake_success = passed_all && m.collisions == 0 && !m.failed;
  return m;
}

nlohmann::json MetricsToJson(const EpisodeMetrics& m, bool include_trace) {
  nlohmann::json j = {{"completed", m.completed},
                      {"failed", m.failed},
                      {"completion_time", m.completion_time},
                      {"avg_speed_kmh", m.avg_speed_kmh},
                      {"max_speed_kmh", m.max_speed_kmh},
                      {"collisions", m.collisions},
                      {"overtake_success", m.overtake_success},
                      {"min_distance", std::isfinite(m.min_distance) ? nlohmann::json(m.min_distance)
                                                                     : nlohmann::json(nullptr)},
                      {"fd_plans", m.fd_plans},
                      {"fd_infeasible", m.fd_infeasible},
                      {"sa_plans", m.sa_plans},
                      {"sa_feasible", m.sa_feasible},
                      {"sa_certificate_violations", m.sa_certificate_violations},
                      {"sa_min_certified", std::isfinite(m.sa_min_certified)
                                               ? nlohmann::json(m.sa_min_certified)
                                               : nlohmann::json(nullptr)},
                      {"switch_decisions", m.switch_decisions},
                      {"degraded_decisions", m.degraded_decisions},
                      {"stale_decisions", m.stale_decisions},
                      {"input_violations", m.input_violations}};
  if (include_trace) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& s : m.mode_trace) trace.push_back({s.time, s.beta, s.gamma});
    j["mode_trace"] = trace;
  }
  return j;
}

// -------------------------------------------------------------- studies

std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void OvertakeStudyConfig::Validate() const {
  if (densities.empty()) throw std::invalid_argument("study.densities must not be empty");
  for (int d : densities) {
    if (d < 0) throw std::invalid_argument("study.densities must be >= 0");
  }
  if (trials < 1) throw std::invalid_argument("study.trials must be >= 1");
  if (modes.empty()) throw std::invalid_argument("study.modes must not be empty");
  if (lanes.empty()) throw std::invalid_argument("study.lanes must not be empty");
  if (!(road_length > 0.0) || !(max_time > 0.0)) {
    throw std::invalid_argument("study road_length and max_time must be positive");
  }
  if (speed_min < 0.0 || speed_max < speed_min) {
    throw std::invalid_argument("study speeds must satisfy 0 <= speed_min <= speed_max");
  }
}

Scenario MakeOvertakeScenario(const OvertakeStudyConfig& config, const ReferencePlan& reference,
                              const Track& track, int density, std::uint64_t seed) {
  Scenario s;
  s.name = "overtake-d" + std::to_string(density);
  s.track = track;
  s.reference = reference;
  s.ego_start_arc = 20.0;
  s.ego_lane = 0.0;
  s.ego_speed = config.ego_speed;
  s.max_time = config.max_time;
  s.goal_arc = config.road_length - 40.0;
  s.pass_margin = config.pass_margin;
  s.seed = seed;
  std::mt19937_64 rng(seed);
  for (int j = 0; j < density; ++j) {
    ObstacleSpec o;
    o.start_arc = s.ego_start_arc + config.first_gap + j * config.spacing +
                  Uniform(rng, -config.jitter_arc, config.jitter_arc);
    const size_t lane = static_cast<size_t>(rng() % config.lanes.size());
    o.lane_offset = config.lanes[lane] + Uniform(rng, -config.lane_jitter, config.lane_jitter);
    o.speed = Uniform(rng, config.speed_min, config.speed_max);
    s.obstacles.push_back(o);
  }
  return s;
}

std::vector<OvertakeRow> OvertakeStudy(const OvertakeStudyConfig& config, const PlannerStack& base,
                                       const Rates& rates,
                                       std::vector<EpisodeMetrics>* trials_out) {
  config.Validate();
  const Track track = MakeStraightTrack(config.road_length, config.half_width);
  const ReferencePlan reference = GenerateReference(track, base.params, base.bounds, {});
  std::vector<OvertakeRow> rows;
  for (StackMode mode : config.modes) {
    PlannerStack stack = base;
    stack.mode = mode;
    for (int density : config.densities) {
      OvertakeRow row;
      row.mode = mode;
      row.density = density;
      for (int trial = 0; trial < config.trials; ++trial) {
        const std::uint64_t seed =
            MixSeed(MixSeed(config.seed, static_cast<std::uint64_t>(density)),
                    static_cast<std::uint64_t>(trial));
        const Scenario scenario = MakeOvertakeScenario(config, reference, track, density, seed);
        const EpisodeMetrics m = RunEpisode(scenario, stack, rates);
        ++row.trials;
        if (m.overtake_success) ++row.successes;
        row.collisions += m.collisions;
        if (trials_out != nullptr) trials_out->push_back(m);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void LapStudyConfig::Validate() const {
  if (obstacle_count < 0) throw std::invalid_argument("study.obstacle_count must be >= 0");
  if (trials < 1) throw std::invalid_argument("study.trials must be >= 1");
  if (lanes.empty()) throw std::invalid_argument("study.lanes must not be empty");
  if (speed_min < 0.0 || speed_max < speed_min) {
    throw std::invalid_argument("study speeds must satisfy 0 <= speed_min <= speed_max");
  }
  if (!(max_time > 0.0)) throw std::invalid_argument("study.max_time must be positive");
}

Scenario MakeLapScenario(const LapStudyConfig& config, const Track& track,
                         const ReferencePlan& reference, int obstacle_count, std::uint64_t seed) {
  Scenario s;
  s.name = "lap-n" + std::to_string(obstacle_count);
  s.track = track;
  s.reference = reference;
  s.ego_speed = config.ego_speed;
  s.max_time = config.max_time;
  s.goal_arc = track.Centerline().Length();
  s.seed = seed;
  std::mt19937_64 rng(seed);
  const double L = s.goal_arc;
  const double usable = L - 2.0 * config.clear_start;
  for (int j = 0; j < obstacle_count; ++j) {
    ObstacleSpec o;
    o.start_arc = config.clear_start + usable * (j + Uniform(rng, 0.0, 0.6)) / obstacle_count;
    o.lane_offset = config.lanes[static_cast<size_t>(rng() % config.lanes.size())];
    o.speed = Uniform(rng, config.speed_min, config.speed_max);
    s.obstacles.push_back(o);
  }
  return s;
}

std::vector<LapRow> LapStudy(const LapStudyConfig& config, const Track& track,
                             const ReferencePlan& reference, const PlannerStack& base,
                             const Rates& rates) {
  config.Validate();
  if (!track.closed) throw std::invalid_argument("lap study needs a closed track");
  struct Entry {
    std::string name;
    StackMode mode;
    int obstacles;
  };
  std::vector<Entry> entries = {{"optimistic", StackMode::kSwitched, 0}};
  if (config.obstacle_count > 0) {
    entries.push_back({"switched", StackMode::kSwitched, config.obstacle_count});
    entries.push_back({"sa-only", StackMode::kSaOnly, config.obstacle_count});
    entries.push_back({"fd-only", StackMode::kFdOnly, config.obstacle_count});
  }
  std::vector<LapRow> rows;
  for (const auto& e : entries) {
    PlannerStack stack = base;
    stack.mode = e.mode;
    LapRow row;
    row.config = e.name;
    bool have = false;
    // Without obstacles every trial is the same episode.
    const int trials = e.obstacles == 0 ? 1 : config.trials;
    for (int trial = 0; trial < trials; ++trial) {
      const std::uint64_t seed = MixSeed(config.seed, static_cast<std::uint64_t>(trial));
      const Scenario scenario = MakeLapScenario(config, track, reference, e.obstacles, seed);
      const EpisodeMetrics m = RunEpisode(scenario, stack, rates);
      if (m.completed) ++row.completed_trials;
      row.total_collisions += m.collisions;
      const bool better =
          !have || (m.completed && !row.best.completed) ||
          (m.completed == row.best.completed && m.completion_time < row.best.completion_time);
      if (better) {
        row.best = m;
        have = true;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string OvertakeTable(const std::vector<OvertakeRow>& rows) {
  std::ostringstream os;
  os << "mode,density,trials,successes,success_rate,collisions\n";
  for (const auto& r : rows) {
    os << ToString(r.mode) << ',' << r.density << ',' << r.trials << ',' << r.successes << ','
       << Num(r.rate(), 4) << ',' << r.collisions << '\n';
  }
  return os.str();
}

std::string LapTable(const std::vector<LapRow>& rows) {
  std::ostringstream os;
  os << "config,lap_time_s,avg_speed_kmh,collisions,max_speed_kmh,completed,completed_trials,total_collisions\n";
  for (const auto& r : rows) {
    os << r.config << ',' << Num(r.best.completion_time, 2) << ','
       << Num(r.best.avg_speed_kmh, 2) << ',' << r.best.collisions << ','
       << Num(r.best.max_speed_kmh, 2) << ',' << (r.best.completed ? 1 : 0) << ','
       << r.completed_trials << ',' << r.total_collisions << '\n';
  }
  return os.str();
}

std::string OvertakePlotData(const std::vector<OvertakeRow>& rows) {
  std::ostringstream os;
  os << "series,x,y\n";
  for (const auto& r : rows) os << ToString(r.mode) << ',' << r.density << ',' << Num(r.rate(), 4) << '\n';
  return os.str();
}

std::string LapPlotData(const std::vector<LapRow>& rows) {
  std::ostringstream os;
  os << "series,x,y\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    os << rows[i].config << ',' << i << ',' << Num(rows[i].best.completion_time, 2) << '\n';
  }
  return os.str();
}

}  // namespace adaplan
