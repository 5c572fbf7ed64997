// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1 for ctest).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adaplan/config.hpp"
#include "fd_oracle.hpp"
#include "test_support.hpp"

using namespace adaplan;
using Clock = std::chrono::steady_clock;

namespace {

double Seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failed = 0;

void Report(int id, const std::string& name, const Outcome& o) {
  std::printf("%s  %2d %-22s %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++g_failed;
}

template <typename... Args>
std::string Fmt(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

ObstacleForecast Car(double x, double y, double vx = 0.0) {
  return {TransformToWorld(RectanglePolytope(4.5, 2.0), RigidPose2(Vec2(x, y), 0.0)),
          Vec2(vx, 0.0)};
}

// ------------------------------------------------------------------ 1

Outcome Duality() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  std::uniform_real_distribution<double> ang(-3.1, 3.1);
  int checked = 0, skipped = 0, bad_margin = 0, bad_flip = 0;
  double worst = 0.0;
  while (checked < 500) {
    const auto body_pts = testing::RandomPointCloud(rng, Vec2::Zero(), 1.5, 6);
    const auto obs_pts = testing::RandomPointCloud(rng, Vec2(u(rng), u(rng)), 1.5, 6);
    const RigidPose2 pose(Vec2(u(rng), u(rng)), ang(rng));
    testing::Pts ego_pts;
    for (const auto& p : body_pts) ego_pts.push_back(Rotation(pose.heading) * p + pose.position);
    const double oracle = testing::SupportSamplingDistance(ego_pts, obs_pts);
    if (oracle <= 1e-3) {
      ++skipped;
      continue;
    }
    ++checked;
    const ConvexPolytope body = ConvexPolytope::FromPoints(body_pts);
    const ConvexPolytope obstacle = ConvexPolytope::FromPoints(obs_pts);
    const MaxMarginDuals res = ComputeMaxMarginDuals(body, pose, obstacle);
    const double err = std::abs(res.margin - oracle);
    worst = std::max(worst, err);
    if (err > 1e-6) ++bad_margin;
    const bool below = DualCertificateFeasible(body, pose, obstacle, res.duals, res.margin - 1e-5, 1e-9);
    const bool above = DualCertificateFeasible(body, pose, obstacle, res.duals, res.margin + 1e-5, 1e-9);
    if (!below || above) ++bad_flip;
  }
  const double secs = Seconds(t0);
  return {bad_margin == 0 && bad_flip == 0 && secs < 30.0,
          Fmt("pairs=%d worst|margin-oracle|=%.2e flip_failures=%d margin_failures=%d time=%.1fs",
              checked, worst, bad_flip, bad_margin, secs)};
}

// ------------------------------------------------------------------ 2

Outcome LinearizationOrder() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VehicleParams p;
  double lo = 1e9, hi = 0.0;
  for (int i = 0; i < 20; ++i) {
    const VehicleState s{50 * u(rng), 50 * u(rng), 3 * u(rng)};
    const ControlInput c{10 + 8 * u(rng), 0.4 * u(rng)};
    Eigen::Matrix<double, 5, 1> dir;
    for (int k = 0; k < 5; ++k) dir(k) = u(rng);
    dir.normalize();
    const LinearizedDynamics lin = Linearize(s, c, p);
    auto residual = [&](double delta) {
      const Eigen::Vector3d s1 = s.AsVector() + delta * dir.head<3>();
      const ControlInput u1 = ControlInput::FromVector(c.AsVector() + delta * dir.tail<2>());
      return (lin.Apply(s1, u1.AsVector()) - StepUnwrapped(s1, u1, p)).norm();
    };
    const double ratio = residual(1e-3) / residual(5e-4);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return {lo >= 3.5 && hi <= 4.5, Fmt("points=20 halving ratio in [%.4f, %.4f]", lo, hi)};
}

// ------------------------------------------------------------------ 3

Outcome FdEquivalence() {
  VehicleParams params;
  ActionBounds bounds;
  const Track track = MakeStraightTrack(400, 5.25);
  const ReferencePlan plan = GenerateReference(track, params, bounds, {});
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> ahead(4.0, 45.0);
  std::uniform_real_distribution<double> speed(0.0, 12.0);
  std::uniform_real_distribution<double> lateral(-4.0, 4.0);
  int cases = 0, mismatched = 0, infeasible = 0;
  for (int M = 1; M <= 8; ++M) {
    FdConfig c;
    c.M = M;
    c.offsets = {-3.5, -2.625, -1.75, -0.875, 0.0, 0.875, 1.75, 2.625, 3.5};
    FdPlanner planner(c, params, bounds, track);
    for (int layout = 0; layout < 100; ++layout) {
      const ReferenceSlice slice = QueryReference(plan, {30, 0, 0}, 0.0, c.H, params.dt);
      PointPredictions obs(1 + rng() % 3);
      for (auto& o : obs) {
        const double x = slice.states[0].x + ahead(rng);
        const double y = lateral(rng);
        const double v = speed(rng);
        for (int h = 0; h <= c.H; ++h) o.push_back({x + v * params.dt * h, y});
      }
      planner.Reset();
      planner.Plan(slice.states[0], {slice.speeds[0], 0.0}, slice, obs);
      const auto& cands = planner.last_candidates();
      const PlanResult tree = TreeSearchSelect(cands, obs, slice, c.d_safe);
      const auto oracle = testing::EnumerateAlpha(cands, obs, slice, c.d_safe);
      ++cases;
      const int tree_id = tree.feasible ? tree.selected_id : -1;
      if (!tree.feasible) ++infeasible;
      const bool same_cost =
          !tree.feasible ||
          std::abs(tree.deviation_cost - oracle.cost) <= 1e-12 * (1.0 + std::abs(oracle.cost));
      if (tree_id != oracle.id || !same_cost) ++mismatched;
    }
  }
  return {mismatched == 0,
          Fmt("M=1..8 x 100 layouts: %d cases, %d mismatches, %d with no clear path", cases,
              mismatched, infeasible)};
}

// ------------------------------------------------------------------ 4

Outcome AmBehavior() {
  VehicleParams params;
  ActionBounds bounds;
  const Track track = MakeStraightTrack(600, 5.25);
  const ReferencePlan plan = GenerateReference(track, params, bounds, {});
  SaConfig c;
  c.H = 10;
  const ReferenceSlice slice = QueryReference(plan, {50, 0, 0}, 0.0, c.H, params.dt);
  const TrackingTargets targets = TargetsFromSlice(slice);
  const std::vector<ObstacleForecast> cars = {Car(68, 0.0, 8.0), Car(75, 3.5, 10.0),
                                              Car(60, -3.5, 9.0)};
  const ShapePredictions obs = PredictShapes(cars, c.H, params.dt);
  const ControlInput prev{16.0, 0.0};
  const AmOutcome cold = AmSolve(slice.states[0], prev, targets, obs, bounds, params, c);
  int non_monotone = 0;
  for (size_t k = 0; k < cold.plan.objective_at_solution.size(); ++k) {
    const double ref = cold.plan.objective_at_reference[k];
    if (cold.plan.objective_at_solution[k] > ref + 1e-6 * (1.0 + std::abs(ref))) ++non_monotone;
  }
  const AmOutcome warm = AmSolve(slice.states[0], prev, targets, obs, bounds, params, c, &cold.state);
  const int it_cold = cold.state.iterations_to_tolerance;
  const int it_warm = warm.state.iterations_to_tolerance;
  const bool warm_ok = it_cold >= 0 && it_warm >= 0 && it_warm <= it_cold;

  // Cycle timings in closed loop on the same scene.
  auto time_loop = [&](auto&& plan_once) {
    std::vector<double> ms;
    for (int k = 0; k < 60; ++k) {
      const auto t0 = Clock::now();
      plan_once(k);
      ms.push_back(1e3 * Seconds(t0));
    }
    std::sort(ms.begin(), ms.end());
    return std::pair<double, double>(ms[ms.size() / 2], ms.back());
  };
  SaPlanner sa(c, params, bounds, track);
  const ReferenceQuery query(plan);
  VehicleState s{50, 0, 0};
  ControlInput u = prev;
  const auto [sa_med, sa_max] = time_loop([&](int k) {
    std::vector<ObstacleForecast> moved;
    for (const auto& car : cars) {
      moved.push_back({TransformToWorld(car.shape, RigidPose2(car.velocity * (0.1 * k), 0.0)),
                       car.velocity});
    }
    const PlanResult r = sa.Plan(s, u, query, 0.0, moved);
    u = r.inputs[0];
    s = StepNonlinear(s, u, params);
  });
  FdConfig fc;
  fc.H = 10;
  FdPlanner fd(fc, params, bounds, track);
  VehicleState f{50, 0, 0};
  ControlInput fu = prev;
  const auto [fd_med, fd_max] = time_loop([&](int k) {
    const ReferenceSlice sl = query.Query(f, 0.0, fc.H, params.dt);
    PointPredictions pts;
    for (const auto& car : cars) {
      std::vector<Vec2> traj;
      for (int h = 0; h <= fc.H; ++h) {
        traj.push_back(car.shape.Centroid() + car.velocity * (0.1 * (k + h)));
      }
      pts.push_back(traj);
    }
    const PlanResult r = fd.Plan(f, fu, sl, pts);
    fu = r.inputs[0];
    f = StepNonlinear(f, fu, params);
  });
  const bool pass = non_monotone == 0 && cold.plan.residual <= 1e-3 && warm_ok && sa_max <= 50.0 &&
                    fd_max <= 10.0;
  return {pass, Fmt("monotone_violations=%d residual=%.1e iters cold=%d warm=%d "
                    "SA med/max=%.2f/%.2fms FD med/max=%.2f/%.2fms",
                    non_monotone, cold.plan.residual, it_cold, it_warm, sa_med, sa_max, fd_med,
                    fd_max)};
}

// ------------------------------------------------------------------ 5, 10

struct OvertakeRun {
  std::vector<OvertakeRow> rows;
  std::vector<EpisodeMetrics> trials;
  double seconds = 0.0;
};

OvertakeRun RunOvertake() {
  OvertakeStudyConfig c;
  c.modes = {StackMode::kFdOnly, StackMode::kSaOnly};
  OvertakeRun out;
  const auto t0 = Clock::now();
  out.rows = OvertakeStudy(c, PlannerStack{}, Rates{}, &out.trials);
  out.seconds = Seconds(t0);
  return out;
}

Outcome OvertakeTrend(const OvertakeRun& run) {
  std::vector<double> fd(6, -1.0), sa(6, -1.0);
  for (const auto& r : run.rows) {
    (r.mode == StackMode::kFdOnly ? fd : sa)[static_cast<size_t>(r.density)] = r.rate();
  }
  bool ok = run.seconds < 600.0 && fd[5] <= 0.25;
  for (int d = 2; d <= 5; ++d) ok = ok && fd[d] <= fd[d - 1];
  for (int d = 1; d <= 3; ++d) ok = ok && sa[d] >= 0.90;
  for (int d = 3; d <= 5; ++d) ok = ok && sa[d] > fd[d];
  return {ok, Fmt("fd=[%.2f %.2f %.2f %.2f %.2f] sa=[%.2f %.2f %.2f %.2f %.2f] trials=20 time=%.0fs",
                  fd[1], fd[2], fd[3], fd[4], fd[5], sa[1], sa[2], sa[3], sa[4], sa[5],
                  run.seconds)};
}

// ------------------------------------------------------------------ 6

Outcome LapOrdering() {
  PlannerStack stack;
  const Track track = MakeStadiumTrack(150, 60, 5.25);
  const ReferencePlan ref = GenerateReference(track, stack.params, stack.bounds, {});
  LapStudyConfig c;
  const auto t0 = Clock::now();
  const auto rows = LapStudy(c, track, ref, stack, Rates{});
  const double secs = Seconds(t0);
  const LapRow* opt = nullptr;
  const LapRow* sw = nullptr;
  const LapRow* sa = nullptr;
  for (const auto& r : rows) {
    if (r.config == "optimistic") opt = &r;
    if (r.config == "switched") sw = &r;
    if (r.config == "sa-only") sa = &r;
  }
  if (!opt || !sw || !sa) return {false, "missing lap rows"};
  const double to = opt->best.completion_time, ts = sw->best.completion_time,
               ta = sa->best.completion_time;
  const bool all_done = opt->best.completed && sw->best.completed && sa->best.completed;
  const bool pass = all_done && to <= ts && ts <= ta && ts <= 1.10 * to && sa->total_collisions == 0;
  return {pass, Fmt("optimistic=%.2fs switched=%.2fs (+%.1f%%) sa-only=%.2fs sa_collisions(all trials)=%d "
                    "time=%.0fs",
                    to, ts, 100.0 * (ts / to - 1.0), ta, sa->total_collisions, secs)};
}

// ------------------------------------------------------------------ 7

Outcome SwitcherPlumbing(const std::string& data_dir) {
  std::ifstream in(data_dir + "/labeled_scenes.json");
  if (!in) return {false, "missing labeled_scenes.json"};
  const auto scenes = LabeledScenesFromJson(nlohmann::json::parse(in));
  const ExperienceDatabase db = LoadExperience(data_dir + "/experience.json");
  EchoEndpoint echo;
  const RuleThresholds runtime;
  auto precision = [&](int k) {
    return EvaluatePrecision(
        [&](const SceneDescription& s) { return LlmSwitch(s, db, k, echo, 0.5, runtime).command; },
        scenes);
  };
  const double fallback = EvaluatePrecision(
      [&](const SceneDescription& s) { return RuleBasedSwitch(s, runtime); }, scenes);
  const double p1 = precision(1), p3 = precision(3), p5 = precision(5), p0 = precision(0);
  const bool pass = p1 == 1.0 && p3 == 1.0 && p5 == 1.0 && p0 == fallback && p1 > p0;
  return {pass, Fmt("scenes=%zu k=1:%.4f k=3:%.4f k=5:%.4f k=0:%.4f fallback=%.4f", scenes.size(),
                    p1, p3, p5, p0, fallback)};
}

// ------------------------------------------------------------------ 8

Outcome MappingExactness() {
  int bad = 0;
  bad += MapMode(PlannerMode::kFd) != 0;
  bad += MapMode(PlannerMode::kSa) != 1;
  for (double v0 : {0.5, 1.0, 2.0, 3.75}) {
    bad += MapSpeed(SpeedCommand::kAcc, v0) != v0;
    bad += MapSpeed(SpeedCommand::kKeep, v0) != 0.0;
    bad += MapSpeed(SpeedCommand::kDec, v0) != -v0;
  }
  return {bad == 0, Fmt("2 mode + 3 speed cases (4 values of v0), mismatches=%d", bad)};
}

// ------------------------------------------------------------------ 9

Outcome Determinism() {
  OvertakeStudyConfig oc;
  oc.trials = 3;
  auto overtake = [&] {
    std::vector<EpisodeMetrics> trials;
    std::string s = OvertakeTable(OvertakeStudy(oc, PlannerStack{}, Rates{}, &trials));
    for (const auto& m : trials) s += MetricsToJson(m, true).dump() + "\n";
    return s;
  };
  PlannerStack stack;
  const Track track = MakeStadiumTrack(150, 60, 5.25);
  const ReferencePlan ref = GenerateReference(track, stack.params, stack.bounds, {});
  LapStudyConfig lc;
  lc.trials = 2;
  auto lap = [&] { return LapTable(LapStudy(lc, track, ref, stack, Rates{})); };
  const bool same_overtake = overtake() == overtake();
  const bool same_lap = lap() == lap();
  return {same_overtake && same_lap,
          Fmt("overtake(3 modes x 5 densities x 3 trials) identical=%s lap(2 trials) identical=%s",
              same_overtake ? "yes" : "no", same_lap ? "yes" : "no")};
}

// ----------------------------------------------------------------- 10

Outcome SafetyContract(const OvertakeRun& run) {
  const double d_safe = SaConfig{}.d_safe;
  int feasible = 0, violations = 0;
  double min_cert = std::numeric_limits<double>::infinity();
  auto add = [&](const EpisodeMetrics& m) {
    feasible += m.sa_feasible;
    violations += m.sa_certificate_violations;
    min_cert = std::min(min_cert, m.sa_min_certified);
  };
  for (const auto& m : run.trials) add(m);
  // Switched stack on the same scenarios, which mixes both planners.
  OvertakeStudyConfig c;
  c.modes = {StackMode::kSwitched};
  c.trials = 5;
  std::vector<EpisodeMetrics> switched;
  OvertakeStudy(c, PlannerStack{}, Rates{}, &switched);
  for (const auto& m : switched) add(m);
  const bool pass = feasible > 0 && violations == 0 && min_cert >= d_safe - 1e-2;
  return {pass, Fmt("feasible SA plans=%d certified min=%.4f m (d_safe=%.2f) violations=%d",
                    feasible, min_cert, d_safe, violations)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string data_dir = argc > 1 ? argv[1] : ADAPLAN_DATA_DIR;
  const auto t0 = Clock::now();
  Report(1, "duality", Duality());
  Report(2, "linearization-order", LinearizationOrder());
  Report(3, "fd-equivalence", FdEquivalence());
  Report(4, "am-behavior", AmBehavior());
  const OvertakeRun overtake = RunOvertake();
  Report(5, "overtake-trend", OvertakeTrend(overtake));
  Report(6, "lap-ordering", LapOrdering());
  Report(7, "switcher-plumbing", SwitcherPlumbing(data_dir));
  Report(8, "mapping-exactness", MappingExactness());
  Report(9, "determinism", Determinism());
  Report(10, "safety-contract", SafetyContract(overtake));
  std::printf("%d/10 criteria passed in %.0fs\n", 10 - g_failed, Seconds(t0));
  return g_failed == 0 ? 0 : 1;
}
