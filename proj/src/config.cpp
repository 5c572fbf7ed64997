#include "adaplan/config.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace adaplan {

namespace {

using nlohmann::json;

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Strict object reader. Every key read is remembered; Finish() rejects the rest.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(Where() + ": expected an object");
  }

  bool Has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  void Num(const char* key, double& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(Field(key) + ": expected a number");
    out = v.get<double>();
  }

  void Int(const char* key, int& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(Field(key) + ": expected an integer");
    out = v.get<int>();
  }

  void U64(const char* key, std::uint64_t& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(Field(key) + ": expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }

  void Bool(const char* key, bool& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(Field(key) + ": expected true or false");
    out = v.get<bool>();
  }

  void Str(const char* key, std::string& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(Field(key) + ": expected a string");
    out = v.get<std::string>();
  }

  void Nums(const char* key, std::vector<double>& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(Field(key) + ": expected an array of numbers");
    out.clear();
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(Field(key) + "[" + std::to_string(i) + "]: expected a number");
      }
      out.push_back(v[i].get<double>());
    }
  }

  void Ints(const char* key, std::vector<int>& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(Field(key) + ": expected an array of integers");
    out.clear();
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) {
        throw ConfigError(Field(key) + "[" + std::to_string(i) + "]: expected an integer");
      }
      out.push_back(v[i].get<int>());
    }
  }

  void Input(const char* key, ControlInput& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError(Field(key) + ": expected [v, psi]");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  }

  template <typename F>
  void Object(const char* key, F&& fn) {
    if (!Has(key)) return;
    Reader child(j_.at(key), Field(key));
    fn(child);
    child.Finish();
  }

  template <typename F>
  void Array(const char* key, F&& fn) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(Field(key) + ": expected an array");
    for (size_t i = 0; i < v.size(); ++i) {
      Reader child(v[i], Field(key) + "[" + std::to_string(i) + "]");
      fn(child);
      child.Finish();
    }
  }

  void Finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(Field(it.key().c_str()) + ": unknown field");
    }
  }

  std::string Field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  std::string Where() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void ReadWeights(Reader& r, TrackingWeights& w) {
  r.Num("position", w.position);
  r.Num("heading", w.heading);
  r.Num("speed", w.speed);
  r.Num("steer", w.steer);
  r.Num("steer_rate", w.steer_rate);
}

json WeightsToJson(const TrackingWeights& w) {
  return {{"position", w.position},
          {"heading", w.heading},
          {"speed", w.speed},
          {"steer", w.steer},
          {"steer_rate", w.steer_rate}};
}

void ReadThresholds(Reader& r, RuleThresholds& t) {
  r.Int("density_sa", t.density_sa);
  r.Num("gap_dec", t.gap_dec);
  r.Num("curve_dec", t.curve_dec);
  r.Num("envelope_margin", t.envelope_margin);
  r.Num("lane_half_width", t.lane_half_width);
}

void ReadStackMode(Reader& r, const char* key, StackMode& out) {
  std::string s;
  if (!r.Has(key)) return;
  r.Str(key, s);
  try {
    out = ParseStackMode(s);
  } catch (const std::invalid_argument&) {
    throw ConfigError(r.Field(key) + ": expected switched, fd-only or sa-only");
  }
}

std::string Resolve(const std::string& base, const std::string& p) {
  if (p.empty()) return p;
  const std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

// Runs a Validate() call, attaching the field path to its message.
template <typename F>
void Check(const std::string& field, F&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    if (msg.rfind(field, 0) == 0) throw ConfigError(msg);
    throw ConfigError(field + ": " + msg);
  }
}

}  // namespace

// ---------------------------------------------------------------- track

Track ParseTrackText(const std::string& text, const std::string& source) {
  Track t;
  bool have_width = false;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = Trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "half_width") {
      double w = 0.0;
      if (!(ls >> w) || !(w > 0.0)) fail("half_width needs a positive number");
      t.half_width = w;
      have_width = true;
    } else if (first == "closed") {
      std::string v;
      ls >> v;
      if (v == "true" || v == "1") {
        t.closed = true;
      } else if (v == "false" || v == "0") {
        t.closed = false;
      } else {
        fail("closed must be true or false");
      }
    } else {
      std::istringstream ps(line);
      double x = 0.0, y = 0.0;
      if (!(ps >> x >> y)) fail("expected 'x y', got '" + line + "'");
      std::string extra;
      if (ps >> extra) fail("unexpected trailing text '" + extra + "'");
      if (!std::isfinite(x) || !std::isfinite(y)) fail("non-finite coordinate");
      t.centerline.emplace_back(x, y);
      continue;
    }
    std::string extra;
    if (ls >> extra) fail("unexpected trailing text '" + extra + "'");
  }
  if (!have_width) throw ConfigError(source + ": missing half_width line");
  try {
    t.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return t;
}

Track LoadTrackFile(const std::string& path) { return ParseTrackText(ReadFile(path), path); }

std::string TrackToText(const Track& track) {
  std::ostringstream os;
  os << "# adaplan track\n";
  os << "half_width " << track.half_width << "\n";
  os << "closed " << (track.closed ? "true" : "false") << "\n";
  os << std::setprecision(10);
  for (const auto& p : track.centerline) os << p.x() << ' ' << p.y() << '\n';
  return os.str();
}

// --------------------------------------------------------------- config

void ApplyOverride(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "': expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &root;
  std::istringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) throw ConfigError("override '" + assignment + "': empty key segment");
    path.push_back(part);
  }
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override '" + key + "': " + path[i] + " is not an object");
    node = &(*node)[path[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("override '" + key + "': parent is not an object");
  (*node)[path.back()] = value;
}

void RunConfig::Validate() const {
  if (track_path.empty()) throw ConfigError("track: required");
  if (!std::filesystem::exists(track_path)) throw ConfigError("track: file not found: " + track_path);
  if (!reference_path.empty() && !std::filesystem::exists(reference_path)) {
    throw ConfigError("reference: file not found: " + reference_path);
  }
  if (!labeled_scenes_path.empty() && !std::filesystem::exists(labeled_scenes_path)) {
    throw ConfigError("labeled_scenes: file not found: " + labeled_scenes_path);
  }
  if (!switcher.database_path.empty() && !std::filesystem::exists(switcher.database_path)) {
    throw ConfigError("switcher.database: file not found: " + switcher.database_path);
  }
  Check("vehicle", [&] { vehicle.Validate(); });
  Check("bounds", [&] { bounds.Validate(); });
  Check("fd", [&] { fd.Validate(); });
  Check("sa", [&] { sa.Validate(); });
  Check("switcher", [&] { switcher.Validate(); });
  Check("timing", [&] { timing.Validate(); });
  Check("rates", [&] { rates.Validate(); });
  Check("overtake", [&] { overtake.Validate(); });
  Check("lap", [&] { lap.Validate(); });
  if (!(scenario.max_time > 0.0)) throw ConfigError("scenario.max_time: must be positive");
  if (scenario.ego_speed < 0.0) throw ConfigError("scenario.ego_speed: must be >= 0");
  if (scenario.goal_arc < 0.0) throw ConfigError("scenario.goal_arc: must be >= 0");
  for (size_t i = 0; i < scenario.obstacles.size(); ++i) {
    const auto& o = scenario.obstacles[i];
    const std::string f = "scenario.obstacles[" + std::to_string(i) + "]";
    if (o.speed < 0.0) throw ConfigError(f + ".speed: must be >= 0");
    if (!(o.length > 0.0) || !(o.width > 0.0)) throw ConfigError(f + ": size must be positive");
  }
}

RunConfig ParseRunConfig(const json& j, const std::string& base_dir) {
  RunConfig c;
  Reader r(j, "");
  r.Str("track", c.track_path);
  r.Str("reference", c.reference_path);
  r.Str("labeled_scenes", c.labeled_scenes_path);
  r.Str("out_dir", c.out_dir);
  r.U64("seed", c.seed);
  ReadStackMode(r, "mode", c.mode);
  r.Object("vehicle", [&](Reader& v) {
    v.Num("wheelbase", c.vehicle.wheelbase);
    v.Num("dt", c.vehicle.dt);
    v.Num("length", c.vehicle.length);
    v.Num("width", c.vehicle.width);
  });
  r.Object("bounds", [&](Reader& b) {
    b.Input("u_min", c.bounds.u_min);
    b.Input("u_max", c.bounds.u_max);
    b.Input("a_min", c.bounds.a_min);
    b.Input("a_max", c.bounds.a_max);
  });
  r.Object("reference_options", [&](Reader& o) {
    o.Num("lookahead", c.reference.lookahead);
    o.Num("a_lat_max", c.reference.a_lat_max);
    o.Num("spacing", c.reference.spacing);
    o.Num("follower_speed", c.reference.follower_speed);
    o.Num("follower_dt", c.reference.follower_dt);
  });
  r.Object("fd", [&](Reader& f) {
    f.Int("M", c.fd.M);
    f.Int("H", c.fd.H);
    f.Num("epsilon", c.fd.epsilon);
    f.Num("d_safe", c.fd.d_safe);
    f.Nums("offsets", c.fd.offsets);
    f.Int("passes", c.fd.passes);
    f.Object("weights", [&](Reader& w) { ReadWeights(w, c.fd.weights); });
  });
  r.Object("sa", [&](Reader& s) {
    s.Int("H", c.sa.H);
    s.Num("d_safe", c.sa.d_safe);
    s.Int("am_iterations", c.sa.am_iterations);
    s.Num("residual_tol", c.sa.residual_tol);
    s.Num("trust_region", c.sa.trust_region);
    s.Num("slack_weight", c.sa.slack_weight);
    s.Num("inner_buffer", c.sa.inner_buffer);
    s.Num("active_range", c.sa.active_range);
    s.Num("convergence_tol", c.sa.convergence_tol);
    s.Bool("corridor", c.sa.corridor);
    s.Nums("lane_offsets", c.sa.lane_offsets);
    s.Int("preview_steps", c.sa.preview_steps);
    s.Num("lane_margin", c.sa.lane_margin);
    s.Num("lane_hysteresis", c.sa.lane_hysteresis);
    s.Object("weights", [&](Reader& w) { ReadWeights(w, c.sa.weights); });
  });
  r.Object("switcher", [&](Reader& s) {
    s.Str("mode", c.switcher.mode);
    s.Str("database", c.switcher.database_path);
    s.Int("k", c.switcher.k);
    s.Num("v0", c.switcher.v0);
    s.Num("timeout_s", c.switcher.timeout_s);
    s.Num("mock_latency_s", c.switcher.mock_latency_s);
    s.Object("thresholds", [&](Reader& t) { ReadThresholds(t, c.switcher.thresholds); });
    s.Num("period", c.switcher.policy.period);
    s.Bool("reactive", c.switcher.policy.reactive);
    s.Object("scene", [&](Reader& t) {
      t.Num("radius", c.switcher.scene.radius);
      t.Num("lane_half_width", c.switcher.scene.lane_half_width);
      t.Num("curve_threshold", c.switcher.scene.curve_threshold);
    });
    s.Object("endpoint", [&](Reader& e) {
      e.Str("url", c.switcher.endpoint.url);
      e.Str("model", c.switcher.endpoint.model);
      e.Str("api_key_env", c.switcher.endpoint.api_key_env);
      e.Int("max_tokens", c.switcher.endpoint.max_tokens);
    });
  });
  r.Object("timing", [&](Reader& t) {
    t.Num("fd_hz", c.timing.fd_hz);
    t.Num("sa_hz", c.timing.sa_hz);
    t.Num("travel_per_cycle", c.timing.travel_per_cycle);
  });
  r.Object("rates", [&](Reader& t) {
    t.Num("control_hz", c.rates.control_hz);
    t.Num("plan_hz", c.rates.plan_hz);
    t.Num("sensing_radius", c.rates.sensing_radius);
  });
  r.Object("scenario", [&](Reader& s) {
    s.Num("ego_start_arc", c.scenario.ego_start_arc);
    s.Num("ego_lane", c.scenario.ego_lane);
    s.Num("ego_speed", c.scenario.ego_speed);
    s.Num("max_time", c.scenario.max_time);
    s.Num("goal_arc", c.scenario.goal_arc);
    s.Num("pass_margin", c.scenario.pass_margin);
    s.Array("obstacles", [&](Reader& o) {
      ObstacleSpec spec;
      o.Num("start_arc", spec.start_arc);
      o.Num("lane_offset", spec.lane_offset);
      o.Num("speed", spec.speed);
      o.Num("length", spec.length);
      o.Num("width", spec.width);
      c.scenario.obstacles.push_back(spec);
    });
  });
  r.Object("overtake", [&](Reader& o) {
    auto& s = c.overtake;
    o.Ints("densities", s.densities);
    o.Int("trials", s.trials);
    if (o.Has("modes")) {
      const json& m = j.at("overtake").at("modes");
      if (!m.is_array()) throw ConfigError("overtake.modes: expected an array");
      s.modes.clear();
      for (size_t i = 0; i < m.size(); ++i) {
        const std::string f = "overtake.modes[" + std::to_string(i) + "]";
        if (!m[i].is_string()) throw ConfigError(f + ": expected a string");
        try {
          s.modes.push_back(ParseStackMode(m[i].get<std::string>()));
        } catch (const std::invalid_argument&) {
          throw ConfigError(f + ": expected switched, fd-only or sa-only");
        }
      }
    }
    o.Num("road_length", s.road_length);
    o.Num("half_width", s.half_width);
    o.Nums("lanes", s.lanes);
    o.Num("ego_speed", s.ego_speed);
    o.Num("first_gap", s.first_gap);
    o.Num("spacing", s.spacing);
    o.Num("jitter_arc", s.jitter_arc);
    o.Num("speed_min", s.speed_min);
    o.Num("speed_max", s.speed_max);
    o.Num("lane_jitter", s.lane_jitter);
    o.Num("max_time", s.max_time);
    o.Num("pass_margin", s.pass_margin);
  });
  r.Object("lap", [&](Reader& o) {
    auto& s = c.lap;
    o.Int("obstacle_count", s.obstacle_count);
    o.Int("trials", s.trials);
    o.Nums("lanes", s.lanes);
    o.Num("speed_min", s.speed_min);
    o.Num("speed_max", s.speed_max);
    o.Num("ego_speed", s.ego_speed);
    o.Num("max_time", s.max_time);
    o.Num("clear_start", s.clear_start);
  });
  r.Finish();

  c.rates.policy = c.switcher.policy;
  c.overtake.seed = c.seed;
  c.lap.seed = c.seed;
  c.track_path = Resolve(base_dir, c.track_path);
  c.reference_path = Resolve(base_dir, c.reference_path);
  c.labeled_scenes_path = Resolve(base_dir, c.labeled_scenes_path);
  c.switcher.database_path = Resolve(base_dir, c.switcher.database_path);
  c.Validate();
  return c;
}

json RunConfigToJson(const RunConfig& c) {
  auto in = [](const ControlInput& u) { return json::array({u.v, u.psi}); };
  json obstacles = json::array();
  for (const auto& o : c.scenario.obstacles) {
    obstacles.push_back({{"start_arc", o.start_arc},
                         {"lane_offset", o.lane_offset},
                         {"speed", o.speed},
                         {"length", o.length},
                         {"width", o.width}});
  }
  json modes = json::array();
  for (auto m : c.overtake.modes) modes.push_back(ToString(m));
  const auto& th = c.switcher.thresholds;
  return {
      {"track", c.track_path},
      {"reference", c.reference_path},
      {"labeled_scenes", c.labeled_scenes_path},
      {"out_dir", c.out_dir},
      {"seed", c.seed},
      {"mode", ToString(c.mode)},
      {"vehicle",
       {{"wheelbase", c.vehicle.wheelbase},
        {"dt", c.vehicle.dt},
        {"length", c.vehicle.length},
        {"width", c.vehicle.width}}},
      {"bounds",
       {{"u_min", in(c.bounds.u_min)},
        {"u_max", in(c.bounds.u_max)},
        {"a_min", in(c.bounds.a_min)},
        {"a_max", in(c.bounds.a_max)}}},
      {"reference_options",
       {{"lookahead", c.reference.lookahead},
        {"a_lat_max", c.reference.a_lat_max},
        {"spacing", c.reference.spacing},
        {"follower_speed", c.reference.follower_speed},
        {"follower_dt", c.reference.follower_dt}}},
      {"fd",
       {{"M", c.fd.M},
        {"H", c.fd.H},
        {"epsilon", c.fd.epsilon},
        {"d_safe", c.fd.d_safe},
        {"offsets", c.fd.offsets},
        {"passes", c.fd.passes},
        {"weights", WeightsToJson(c.fd.weights)}}},
      {"sa",
       {{"H", c.sa.H},
        {"d_safe", c.sa.d_safe},
        {"am_iterations", c.sa.am_iterations},
        {"residual_tol", c.sa.residual_tol},
        {"trust_region", c.sa.trust_region},
        {"slack_weight", c.sa.slack_weight},
        {"inner_buffer", c.sa.inner_buffer},
        {"active_range", c.sa.active_range},
        {"convergence_tol", c.sa.convergence_tol},
        {"corridor", c.sa.corridor},
        {"lane_offsets", c.sa.lane_offsets},
        {"preview_steps", c.sa.preview_steps},
        {"lane_margin", c.sa.lane_margin},
        {"lane_hysteresis", c.sa.lane_hysteresis},
        {"weights", WeightsToJson(c.sa.weights)}}},
      {"switcher",
       {{"mode", c.switcher.mode},
        {"database", c.switcher.database_path},
        {"k", c.switcher.k},
        {"v0", c.switcher.v0},
        {"timeout_s", c.switcher.timeout_s},
        {"mock_latency_s", c.switcher.mock_latency_s},
        {"thresholds",
         {{"density_sa", th.density_sa},
          {"gap_dec", th.gap_dec},
          {"curve_dec", th.curve_dec},
          {"envelope_margin", th.envelope_margin},
          {"lane_half_width", th.lane_half_width}}},
        {"period", c.switcher.policy.period},
        {"reactive", c.switcher.policy.reactive},
        {"scene",
         {{"radius", c.switcher.scene.radius},
          {"lane_half_width", c.switcher.scene.lane_half_width},
          {"curve_threshold", c.switcher.scene.curve_threshold}}},
        {"endpoint",
         {{"url", c.switcher.endpoint.url},
          {"model", c.switcher.endpoint.model},
          {"api_key_env", c.switcher.endpoint.api_key_env},
          {"max_tokens", c.switcher.endpoint.max_tokens}}}}},
      {"timing",
       {{"fd_hz", c.timing.fd_hz},
        {"sa_hz", c.timing.sa_hz},
        {"travel_per_cycle", c.timing.travel_per_cycle}}},
      {"rates",
       {{"control_hz", c.rates.control_hz},
        {"plan_hz", c.rates.plan_hz},
        {"sensing_radius", c.rates.sensing_radius}}},
      {"scenario",
       {{"ego_start_arc", c.scenario.ego_start_arc},
        {"ego_lane", c.scenario.ego_lane},
        {"ego_speed", c.scenario.ego_speed},
        {"max_time", c.scenario.max_time},
        {"goal_arc", c.scenario.goal_arc},
        {"pass_margin", c.scenario.pass_margin},
        {"obstacles", obstacles}}},
      {"overtake",
       {{"densities", c.overtake.densities},
        {"trials", c.overtake.trials},
        {"modes", modes},
        {"road_length", c.overtake.road_length},
        {"half_width", c.overtake.half_width},
        {"lanes", c.overtake.lanes},
        {"ego_speed", c.overtake.ego_speed},
        {"first_gap", c.overtake.first_gap},
        {"spacing", c.overtake.spacing},
        {"jitter_arc", c.overtake.jitter_arc},
        {"speed_min", c.overtake.speed_min},
        {"speed_max", c.overtake.speed_max},
        {"lane_jitter", c.overtake.lane_jitter},
        {"max_time", c.overtake.max_time},
        {"pass_margin", c.overtake.pass_margin}}},
      {"lap",
       {{"obstacle_count", c.lap.obstacle_count},
        {"trials", c.lap.trials},
        {"lanes", c.lap.lanes},
        {"speed_min", c.lap.speed_min},
        {"speed_max", c.lap.speed_max},
        {"ego_speed", c.lap.ego_speed},
        {"max_time", c.lap.max_time},
        {"clear_start", c.lap.clear_start}}}};
}

RunConfig LoadRunConfig(const std::string& path, const std::vector<std::string>& overrides) {
  const std::string text = ReadFile(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  for (const auto& o : overrides) ApplyOverride(j, o);
  const auto base = std::filesystem::path(path).parent_path().string();
  return ParseRunConfig(j, base.empty() ? "." : base);
}

PlannerStack MakeStack(const RunConfig& c) {
  PlannerStack s;
  s.mode = c.mode;
  s.params = c.vehicle;
  s.bounds = c.bounds;
  s.fd = c.fd;
  s.sa = c.sa;
  s.switcher = c.switcher;
  s.timing = c.timing;
  if (!c.switcher.database_path.empty()) {
    try {
      s.experience = LoadExperience(c.switcher.database_path);
    } catch (const std::exception& e) {
      throw ConfigError("switcher.database: " + std::string(e.what()));
    }
  }
  return s;
}

ReferencePlan ResolveReference(const RunConfig& c, const Track& track) {
  if (c.reference_path.empty()) return GenerateReference(track, c.vehicle, c.bounds, c.reference);
  json j;
  try {
    j = json::parse(ReadFile(c.reference_path));
    return ReferenceFromJson(j);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(c.reference_path + ": " + e.what());
  }
}

Scenario MakeScenario(const RunConfig& c, const Track& track, const ReferencePlan& reference) {
  Scenario s;
  s.name = "run";
  s.track = track;
  s.reference = reference;
  s.ego_start_arc = c.scenario.ego_start_arc;
  s.ego_lane = c.scenario.ego_lane;
  s.ego_speed = c.scenario.ego_speed;
  s.obstacles = c.scenario.obstacles;
  s.max_time = c.scenario.max_time;
  s.pass_margin = c.scenario.pass_margin;
  s.seed = c.seed;
  const double L = track.Centerline().Length();
  s.goal_arc = c.scenario.goal_arc > 0.0 ? c.scenario.goal_arc
                                         : (track.closed ? L : std::max(L - 40.0 - s.ego_start_arc, 1.0));
  return s;
}

}  // namespace adaplan
