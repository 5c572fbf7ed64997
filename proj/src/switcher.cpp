#include "adaplan/switcher.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace adaplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool Finite(double v) { return std::isfinite(v); }

std::string Fixed(double v, int digits = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

std::string ToString(PlannerMode m) { return m == PlannerMode::kFd ? "fd" : "sa"; }

std::string ToString(SpeedCommand c) {
  switch (c) {
    case SpeedCommand::kAcc:
      return "acc";
    case SpeedCommand::kKeep:
      return "keep";
    case SpeedCommand::kDec:
      return "dec";
  }
  return "keep";
}

std::optional<PlannerMode> ParsePlannerMode(const std::string& s) {
  if (s == "fd") return PlannerMode::kFd;
  if (s == "sa") return PlannerMode::kSa;
  return std::nullopt;
}

std::optional<SpeedCommand> ParseSpeedCommand(const std::string& s) {
  if (s == "acc") return SpeedCommand::kAcc;
  if (s == "keep") return SpeedCommand::kKeep;
  if (s == "dec") return SpeedCommand::kDec;
  return std::nullopt;
}

int MapMode(PlannerMode c1) { return c1 == PlannerMode::kFd ? 0 : 1; }

double MapSpeed(SpeedCommand c2, double v0) {
  if (!(v0 > 0.0) || !Finite(v0)) throw std::invalid_argument("v0 must be positive");
  switch (c2) {
    case SpeedCommand::kAcc:
      return v0;
    case SpeedCommand::kKeep:
      return 0.0;
    case SpeedCommand::kDec:
      return -v0;
  }
  return 0.0;
}

ModeConfig ToModeConfig(const ModeCommand& c, double v0) {
  return {MapMode(c.c1), MapSpeed(c.c2, v0)};
}

// ---------------------------------------------------------------- scenes

void SceneDescription::Validate() const {
  const bool finite = Finite(ego.x) && Finite(ego.y) && Finite(ego.theta) && Finite(speed) &&
                      Finite(ego_lateral) && Finite(curvature_ahead) && Finite(envelope_speed);
  if (!finite) throw std::invalid_argument("scene has non-finite fields");
  for (const auto& o : obstacles) {
    if (!o.relative_position.allFinite() || !Finite(o.relative_speed) ||
        !Finite(o.lane_offset) || !Finite(o.arc_gap)) {
      throw std::invalid_argument("scene obstacle has non-finite fields");
    }
  }
  if (density != static_cast<int>(obstacles.size())) {
    throw std::invalid_argument("scene density must equal the obstacle count");
  }
}

SceneDescription DescribeScene(const VehicleState& ego, double speed,
                               const std::vector<ObservedAgent>& agents,
                               const ReferenceQuery& query, const SceneOptions& options) {
  SceneDescription scene;
  scene.ego = ego;
  scene.speed = speed;
  const Polyline& path = query.path();
  const double length = query.ArcLength();
  const bool closed = query.plan().closed;
  const double ego_arc = query.ArcOf(ego.position());
  scene.ego_lateral = path.Project(ego.position()).lateral;

  const Mat2 to_ego = Rotation(ego.theta).transpose();
  for (const auto& a : agents) {
    const Vec2 rel = a.position - ego.position();
    if (rel.norm() > options.radius) continue;
    ObstacleObservation o;
    o.relative_position = to_ego * rel;
    const Polyline::Projection proj = path.Project(a.position);
    o.lane_offset = proj.lateral;
    double gap = query.ArcOf(a.position) - ego_arc;
    if (closed && length > 0.0) {
      gap = std::fmod(gap, length);
      if (gap > 0.5 * length) gap -= length;
      if (gap < -0.5 * length) gap += length;
    }
    o.arc_gap = gap;
    const double heading = path.HeadingAt(proj.s);
    o.relative_speed = a.velocity.dot(Vec2(std::cos(heading), std::sin(heading))) - speed;
    scene.obstacles.push_back(o);
  }
  scene.density = static_cast<int>(scene.obstacles.size());

  // Track context over the lookahead arc.
  const double spacing = std::max(query.plan().spacing, 1e-3);
  double kmax = 0.0;
  double vmin = kInf;
  for (double d = 0.0; d <= options.radius + 1e-9; d += spacing) {
    double s = ego_arc + d;
    if (!closed && s > length) break;
    s = query.WrapArc(s);
    kmax = std::max(kmax, std::abs(query.CurvatureAt(s)));
    vmin = std::min(vmin, query.SpeedAt(s));
  }
  scene.curvature_ahead = kmax;
  scene.envelope_speed = Finite(vmin) ? vmin : query.SpeedAt(query.WrapArc(ego_arc));
  scene.segment = kmax > options.curve_threshold ? SegmentKind::kCurve : SegmentKind::kStraight;
  return scene;
}

double NearestGapAhead(const SceneDescription& scene, double lane_half_width) {
  double best = kInf;
  for (const auto& o : scene.obstacles) {
    if (o.arc_gap < 0.0) continue;
    if (std::abs(o.lane_offset - scene.ego_lateral) >= lane_half_width) continue;
    best = std::min(best, o.arc_gap);
  }
  return best;
}

FeatureVector SceneFeatures(const SceneDescription& scene, double gap_cap) {
  return {scene.speed,
          scene.envelope_speed,
          static_cast<double>(scene.density),
          std::min(NearestGapAhead(scene), gap_cap),
          scene.curvature_ahead,
          scene.ego_lateral};
}

const std::array<const char*, kFeatureCount>& FeatureNames() {
  static const std::array<const char*, kFeatureCount> names = {
      "speed", "envelope_speed", "density", "gap_ahead", "curvature_ahead", "ego_lateral"};
  return names;
}

const FeatureVector& FeatureScales() {
  static const FeatureVector scales = {20.0, 20.0, 5.0, 50.0, 0.05, 3.5};
  return scales;
}

double FeatureDistance(const FeatureVector& a, const FeatureVector& b) {
  const FeatureVector& s = FeatureScales();
  double sum = 0.0;
  for (int i = 0; i < kFeatureCount; ++i) {
    const double d = (a[i] - b[i]) / s[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

// ------------------------------------------------------------ experience

void ExperienceEntry::Validate() const {
  for (double f : features) {
    if (!Finite(f)) throw std::invalid_argument("experience '" + id + "' has non-finite features");
  }
}

nlohmann::json CommandToJson(const ModeCommand& c) {
  return {{"c1", ToString(c.c1)}, {"c2", ToString(c.c2)}};
}

ModeCommand CommandFromJson(const nlohmann::json& j) {
  const auto c1 = ParsePlannerMode(j.at("c1").get<std::string>());
  const auto c2 = ParseSpeedCommand(j.at("c2").get<std::string>());
  if (!c1 || !c2) throw std::invalid_argument("command must be c1 in {fd, sa}, c2 in {acc, keep, dec}");
  return {*c1, *c2};
}

nlohmann::json ExperienceToJson(const ExperienceDatabase& db) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : db) {
    nlohmann::json f;
    for (int i = 0; i < kFeatureCount; ++i) f[FeatureNames()[i]] = e.features[i];
    arr.push_back({{"id", e.id}, {"features", f}, {"command", CommandToJson(e.command)},
                   {"rationale", e.rationale}});
  }
  return {{"entries", arr}};
}

ExperienceDatabase ExperienceFromJson(const nlohmann::json& j) {
  ExperienceDatabase db;
  const nlohmann::json& arr = j.is_array() ? j : j.at("entries");
  for (size_t n = 0; n < arr.size(); ++n) {
    const auto& item = arr[n];
    ExperienceEntry e;
    e.id = item.contains("id") ? item.at("id").get<std::string>() : "e" + std::to_string(n);
    const auto& f = item.at("features");
    for (int i = 0; i < kFeatureCount; ++i) e.features[i] = f.at(FeatureNames()[i]).get<double>();
    e.command = CommandFromJson(item.at("command"));
    e.rationale = item.value("rationale", "");
    e.Validate();
    db.push_back(std::move(e));
  }
  return db;
}

ExperienceDatabase LoadExperience(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open experience database: " + path);
  return ExperienceFromJson(nlohmann::json::parse(in));
}

std::vector<size_t> RetrieveTopK(const FeatureVector& query, const ExperienceDatabase& db, int k) {
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  std::vector<size_t> idx(db.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> dist(db.size());
  for (size_t i = 0; i < db.size(); ++i) dist[i] = FeatureDistance(query, db[i].features);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return dist[a] < dist[b]; });
  idx.resize(std::min(idx.size(), static_cast<size_t>(k)));
  return idx;
}

// ---------------------------------------------------------------- prompt

std::string BuildPrompt(const SceneDescription& scene,
                        const std::vector<const ExperienceEntry*>& retrieved) {
  std::ostringstream p;
  p << "[" << kPromptVersion << "]\n";
  p << "You choose the planning mode of an autonomous race car.\n"
       "c1 selects the planner: fd (fast driving, point obstacles) or sa (shape aware, "
       "dense traffic).\n"
       "c2 shifts the reference speed: acc, keep or dec.\n\n";
  p << "Scene:\n";
  p << "  ego: x=" << Fixed(scene.ego.x) << " y=" << Fixed(scene.ego.y)
    << " heading=" << Fixed(scene.ego.theta) << " speed=" << Fixed(scene.speed)
    << " lateral=" << Fixed(scene.ego_lateral) << "\n";
  p << "  track: " << (scene.segment == SegmentKind::kCurve ? "curve" : "straight")
    << " curvature_ahead=" << Fixed(scene.curvature_ahead, 4)
    << " envelope_speed=" << Fixed(scene.envelope_speed) << "\n";
  p << "  density: " << scene.density << "\n";
  for (size_t i = 0; i < scene.obstacles.size(); ++i) {
    const auto& o = scene.obstacles[i];
    p << "  obstacle " << i + 1 << ": rel=(" << Fixed(o.relative_position.x()) << ", "
      << Fixed(o.relative_position.y()) << ") rel_speed=" << Fixed(o.relative_speed)
      << " lane_offset=" << Fixed(o.lane_offset) << " gap=" << Fixed(o.arc_gap) << "\n";
  }
  if (!retrieved.empty()) {
    p << "\nExperience:\n";
    for (size_t r = 0; r < retrieved.size(); ++r) {
      const ExperienceEntry& e = *retrieved[r];
      p << "Experience " << r + 1 << " [" << e.id << "]\n";
      p << "  features:";
      for (int i = 0; i < kFeatureCount; ++i) {
        p << " " << FeatureNames()[i] << "=" << Fixed(e.features[i], 4);
      }
      p << "\n  command: " << CommandToJson(e.command).dump() << "\n";
      if (!e.rationale.empty()) p << "  rationale: " << e.rationale << "\n";
    }
  }
  p << "\nThink step by step, then end with one line holding a JSON object "
       "{\"c1\": \"fd\"|\"sa\", \"c2\": \"acc\"|\"keep\"|\"dec\", \"reasoning\": \"...\"}.\n";
  return p.str();
}

std::optional<ModeCommand> ParseCommand(const std::string& text) {
  for (size_t open = text.find('{'); open != std::string::npos;
       open = text.find('{', open + 1)) {
    int depth = 0;
    bool in_string = false;
    for (size_t i = open; i < text.size(); ++i) {
      const char ch = text[i];
      if (in_string) {
        if (ch == '\\') {
          ++i;
        } else if (ch == '"') {
          in_string = false;
        }
        continue;
      }
      if (ch == '"') {
        in_string = true;
      } else if (ch == '{') {
        ++depth;
      } else if (ch == '}' && --depth == 0) {
        const auto j = nlohmann::json::parse(text.substr(open, i - open + 1), nullptr, false);
        if (!j.is_discarded() && j.is_object() && j.contains("c1") && j.contains("c2") &&
            j["c1"].is_string() && j["c2"].is_string()) {
          const auto c1 = ParsePlannerMode(j["c1"].get<std::string>());
          const auto c2 = ParseSpeedCommand(j["c2"].get<std::string>());
          if (c1 && c2) return ModeCommand{*c1, *c2};
        }
        break;
      }
    }
  }
  return std::nullopt;
}

// ------------------------------------------------------------- endpoints

CompletionResponse EchoEndpoint::Complete(const std::string& prompt, double) {
  CompletionResponse r;
  const size_t block = prompt.find("\nExperience 1 [");
  const size_t cmd = block == std::string::npos ? block : prompt.find("  command: ", block);
  if (cmd == std::string::npos) {
    r.ok = true;
    r.text = "No stored experience to echo.";
    return r;
  }
  const size_t start = cmd + std::string("  command: ").size();
  const std::string record = prompt.substr(start, prompt.find('\n', start) - start);
  r.ok = true;
  r.text = "Following the closest experience.\n" + record;
  return r;
}

LatencyEndpoint::LatencyEndpoint(std::shared_ptr<CompletionEndpoint> inner, double latency_s)
    : inner_(std::move(inner)), latency_s_(latency_s) {
  if (!inner_) throw std::invalid_argument("latency endpoint needs an inner endpoint");
  if (!(latency_s >= 0.0)) throw std::invalid_argument("latency must be >= 0");
}

CompletionResponse LatencyEndpoint::Complete(const std::string& prompt, double timeout_s) {
  if (latency_s_ > timeout_s) {
    CompletionResponse r;
    r.error = "timeout";
    r.latency_s = timeout_s;
    return r;
  }
  CompletionResponse r = inner_->Complete(prompt, timeout_s - latency_s_);
  r.latency_s += latency_s_;
  return r;
}

std::string LatencyEndpoint::Name() const { return inner_->Name() + "+latency"; }

HttpCompletionEndpoint::HttpCompletionEndpoint(HttpEndpointConfig config)
    : config_(std::move(config)) {
  const size_t scheme = config_.url.find("://");
  if (scheme == std::string::npos) throw std::invalid_argument("endpoint url needs a scheme");
  const size_t slash = config_.url.find('/', scheme + 3);
  origin_ = config_.url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : config_.url.substr(slash);
}

CompletionResponse HttpCompletionEndpoint::Complete(const std::string& prompt, double timeout_s) {
  CompletionResponse r;
  const auto start = std::chrono::steady_clock::now();
  try {
    httplib::Client client(origin_);
    const auto timeout = std::chrono::duration<double>(timeout_s);
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
    client.set_connection_timeout(us);
    client.set_read_timeout(us);
    client.set_write_timeout(us);
    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    const nlohmann::json body = {{"model", config_.model},
                                 {"prompt", prompt},
                                 {"max_tokens", config_.max_tokens},
                                 {"temperature", 0.0}};
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    r.latency_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!res) {
      r.error = "request failed: " + httplib::to_string(res.error());
      return r;
    }
    if (res->status != 200) {
      r.error = "http status " + std::to_string(res->status);
      return r;
    }
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) {
      r.error = "reply is not JSON";
      return r;
    }
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
      const auto& c = j["choices"][0];
      if (c.contains("text") && c["text"].is_string()) {
        r.text = c["text"];
      } else if (c.contains("message") && c["message"].contains("content")) {
        r.text = c["message"]["content"].get<std::string>();
      }
    } else if (j.contains("text") && j["text"].is_string()) {
      r.text = j["text"];
    }
    r.ok = !r.text.empty();
    if (!r.ok) r.error = "reply carries no text";
    if (r.latency_s > timeout_s) {
      r.ok = false;
      r.error = "timeout";
    }
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

// ----------------------------------------------------------------- rules

RuleThresholds ExpertThresholds() {
  RuleThresholds t;
  t.density_sa = 3;
  t.gap_dec = 20.0;
  t.curve_dec = 0.015;
  t.envelope_margin = 1.0;
  return t;
}

ModeCommand RuleBasedSwitch(const SceneDescription& scene, const RuleThresholds& t) {
  ModeCommand c;
  c.c1 = scene.density >= t.density_sa ? PlannerMode::kSa : PlannerMode::kFd;
  const double gap = NearestGapAhead(scene, t.lane_half_width);
  if (gap < t.gap_dec || scene.curvature_ahead > t.curve_dec) {
    c.c2 = SpeedCommand::kDec;
  } else if (!Finite(gap) && scene.speed < scene.envelope_speed - t.envelope_margin) {
    c.c2 = SpeedCommand::kAcc;
  } else {
    c.c2 = SpeedCommand::kKeep;
  }
  return c;
}

SwitchResult LlmSwitch(const SceneDescription& scene, const ExperienceDatabase& db, int k,
                       CompletionEndpoint& endpoint, double timeout_s,
                       const RuleThresholds& fallback) {
  SwitchResult out;
  std::vector<const ExperienceEntry*> retrieved;
  if (k > 0 && !db.empty()) {
    for (size_t i : RetrieveTopK(SceneFeatures(scene), db, k)) {
      retrieved.push_back(&db[i]);
      out.retrieved_ids.push_back(db[i].id);
    }
  }
  const std::string prompt = BuildPrompt(scene, retrieved);
  CompletionResponse resp;
  try {
    resp = endpoint.Complete(prompt, timeout_s);
  } catch (const std::exception& e) {
    resp.ok = false;
    resp.error = e.what();
  }
  out.latency_s = std::min(resp.latency_s, timeout_s);
  out.raw_response = resp.text;
  std::optional<ModeCommand> parsed;
  if (resp.ok && resp.latency_s <= timeout_s) {
    parsed = ParseCommand(resp.text);
    if (!parsed) resp.error = "unparseable reply";
  }
  if (parsed) {
    out.command = *parsed;
  } else {
    out.command = RuleBasedSwitch(scene, fallback);
    out.degraded = true;
    out.error = resp.error.empty() ? "endpoint failure" : resp.error;
  }
  return out;
}

// ------------------------------------------------------------- scene io

nlohmann::json SceneToJson(const SceneDescription& s) {
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& o : s.obstacles) {
    obs.push_back({{"rel_x", o.relative_position.x()},
                   {"rel_y", o.relative_position.y()},
                   {"rel_speed", o.relative_speed},
                   {"lane_offset", o.lane_offset},
                   {"arc_gap", o.arc_gap}});
  }
  return {{"ego", {s.ego.x, s.ego.y, s.ego.theta}},
          {"speed", s.speed},
          {"ego_lateral", s.ego_lateral},
          {"segment", s.segment == SegmentKind::kCurve ? "curve" : "straight"},
          {"curvature_ahead", s.curvature_ahead},
          {"envelope_speed", s.envelope_speed},
          {"density", s.density},
          {"obstacles", obs}};
}

SceneDescription SceneFromJson(const nlohmann::json& j) {
  SceneDescription s;
  const auto& ego = j.at("ego");
  s.ego = {ego.at(0).get<double>(), ego.at(1).get<double>(), ego.at(2).get<double>()};
  s.speed = j.at("speed").get<double>();
  s.ego_lateral = j.value("ego_lateral", 0.0);
  s.segment = j.value("segment", std::string("straight")) == "curve" ? SegmentKind::kCurve
                                                                      : SegmentKind::kStraight;
  s.curvature_ahead = j.at("curvature_ahead").get<double>();
  s.envelope_speed = j.at("envelope_speed").get<double>();
  for (const auto& o : j.at("obstacles")) {
    ObstacleObservation ob;
    ob.relative_position = {o.at("rel_x").get<double>(), o.at("rel_y").get<double>()};
    ob.relative_speed = o.at("rel_speed").get<double>();
    ob.lane_offset = o.at("lane_offset").get<double>();
    ob.arc_gap = o.at("arc_gap").get<double>();
    s.obstacles.push_back(ob);
  }
  s.density = static_cast<int>(s.obstacles.size());
  if (j.contains("density") && j["density"].get<int>() != s.density) {
    throw std::invalid_argument("scene density must equal the obstacle count");
  }
  s.Validate();
  return s;
}

nlohmann::json LabeledScenesToJson(const std::vector<LabeledScene>& scenes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : scenes) {
    arr.push_back({{"scene", SceneToJson(s.scene)}, {"label", CommandToJson(s.label)}});
  }
  return {{"scenes", arr}};
}

std::vector<LabeledScene> LabeledScenesFromJson(const nlohmann::json& j) {
  std::vector<LabeledScene> out;
  const nlohmann::json& arr = j.is_array() ? j : j.at("scenes");
  for (const auto& item : arr) {
    out.push_back({SceneFromJson(item.at("scene")), CommandFromJson(item.at("label"))});
  }
  return out;
}

// -------------------------------------------------------------- triggers

void SwitchTriggerPolicy::Validate() const {
  if (!(period > 0.0)) throw std::invalid_argument("switcher.policy.period must be positive");
}

bool ShouldTrigger(const SwitchTriggerPolicy& policy, double now, double last_trigger,
                   bool newly_detected_obstacle) {
  if (now < last_trigger) throw std::invalid_argument("trigger timestamps must be monotone");
  // Small slack so that accumulated substeps land on the period boundary.
  if (now - last_trigger >= policy.period - 1e-9) return true;
  return policy.reactive && newly_detected_obstacle;
}

ModeCell::ModeCell(ModeConfig initial) { value_.config = initial; }

bool ModeCell::Publish(std::uint64_t sequence, const ModeConfig& config) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (sequence <= value_.sequence) return false;
  value_ = {sequence, config};
  return true;
}

ModeCell::Snapshot ModeCell::Read() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return value_;
}

// -------------------------------------------------------------- switcher

void SwitcherConfig::Validate() const {
  if (mode != "rule" && mode != "mock" && mode != "endpoint") {
    throw std::invalid_argument("switcher.mode must be one of rule, mock, endpoint");
  }
  if (k < 0) throw std::invalid_argument("switcher.k must be >= 0");
  if (!(v0 > 0.0)) throw std::invalid_argument("switcher.v0 must be positive");
  if (!(timeout_s > 0.0)) throw std::invalid_argument("switcher.timeout_s must be positive");
  if (!(mock_latency_s >= 0.0)) throw std::invalid_argument("switcher.mock_latency_s must be >= 0");
  policy.Validate();
}

Switcher::Switcher(SwitcherConfig config, ExperienceDatabase db)
    : config_(std::move(config)), db_(std::move(db)) {
  config_.Validate();
  for (const auto& e : db_) e.Validate();
  if (config_.mode == "mock") {
    endpoint_ = std::make_shared<EchoEndpoint>();
    if (config_.mock_latency_s > 0.0) {
      endpoint_ = std::make_shared<LatencyEndpoint>(endpoint_, config_.mock_latency_s);
    }
  } else if (config_.mode == "endpoint") {
    endpoint_ = std::make_shared<HttpCompletionEndpoint>(config_.endpoint);
  }
}

SwitchResult Switcher::Decide(const SceneDescription& scene) {
  if (!endpoint_) {
    SwitchResult r;
    r.command = RuleBasedSwitch(scene, config_.thresholds);
    return r;
  }
  return LlmSwitch(scene, db_, config_.k, *endpoint_, config_.timeout_s, config_.thresholds);
}

double Switcher::DecisionLatency() const {
  if (config_.mode == "mock") return std::min(config_.mock_latency_s, config_.timeout_s);
  if (config_.mode == "endpoint") return config_.timeout_s;
  return 0.0;
}

void DecisionLog::Record(double time, std::uint64_t sequence, const SceneDescription& scene,
                         const SwitchResult& result) {
  if (out_ == nullptr) return;
  nlohmann::json features;
  const FeatureVector f = SceneFeatures(scene);
  for (int i = 0; i < kFeatureCount; ++i) features[FeatureNames()[i]] = f[i];
  const nlohmann::json rec = {{"time", time},
                              {"sequence", sequence},
                              {"scene", features},
                              {"retrieved", result.retrieved_ids},
                              {"raw_response", result.raw_response},
                              {"command", CommandToJson(result.command)},
                              {"degraded", result.degraded},
                              {"error", result.error}};
  *out_ << rec.dump() << "\n";
}

}  // namespace adaplan
