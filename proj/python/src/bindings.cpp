#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "adaplan/config.hpp"

namespace py = pybind11;
using namespace adaplan;

namespace {

std::vector<Vec2> ToPoints(const std::vector<std::pair<double, double>>& pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& [x, y] : pts) out.emplace_back(x, y);
  return out;
}

// nlohmann::json -> Python objects via the json module.
py::object ToPython(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_adaplan, m) {
  m.doc() = "adaplan planning core";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::enum_<PlannerMode>(m, "PlannerMode").value("FD", PlannerMode::kFd).value("SA", PlannerMode::kSa);
  py::enum_<SpeedCommand>(m, "SpeedCommand")
      .value("ACC", SpeedCommand::kAcc)
      .value("KEEP", SpeedCommand::kKeep)
      .value("DEC", SpeedCommand::kDec);

  m.def("map_mode", &MapMode, py::arg("c1"));
  m.def("map_speed", &MapSpeed, py::arg("c2"), py::arg("v0"));

  m.def(
      "min_distance",
      [](const std::vector<std::pair<double, double>>& a,
         const std::vector<std::pair<double, double>>& b) {
        const auto pa = ToPoints(a), pb = ToPoints(b);
        return MinDistance(ConvexPolytope::FromPoints(pa), ConvexPolytope::FromPoints(pb));
      },
      py::arg("a"), py::arg("b"), "Euclidean distance between the convex hulls of two point sets.");

  m.def(
      "max_margin_duals",
      [](double length, double width, std::tuple<double, double, double> pose,
         const std::vector<std::pair<double, double>>& obstacle) {
        const auto pts = ToPoints(obstacle);
        const auto [x, y, heading] = pose;
        const MaxMarginDuals d = ComputeMaxMarginDuals(
            RectanglePolytope(length, width), RigidPose2(Vec2(x, y), heading),
            ConvexPolytope::FromPoints(pts));
        py::dict out;
        out["margin"] = d.margin;
        out["lambda"] = std::vector<double>(d.duals.lambda.data(),
                                            d.duals.lambda.data() + d.duals.lambda.size());
        out["mu"] = std::vector<double>(d.duals.mu.data(), d.duals.mu.data() + d.duals.mu.size());
        return out;
      },
      py::arg("length"), py::arg("width"), py::arg("pose"), py::arg("obstacle"));

  m.def(
      "load_track",
      [](const std::string& path) {
        const Track t = LoadTrackFile(path);
        py::dict out;
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : t.centerline) pts.emplace_back(p.x(), p.y());
        out["centerline"] = pts;
        out["half_width"] = t.half_width;
        out["closed"] = t.closed;
        return out;
      },
      py::arg("path"));

  m.def(
      "generate_reference",
      [](const std::string& track_path) {
        const Track t = LoadTrackFile(track_path);
        return ToPython(ReferenceToJson(GenerateReference(t, {}, {}, {})));
      },
      py::arg("track_path"), "Reference plan with default vehicle parameters, as a dict.");

  m.def(
      "run_config",
      [](const std::string& path, const std::vector<std::string>& overrides) {
        const RunConfig cfg = LoadRunConfig(path, overrides);
        EpisodeMetrics metrics;
        {
          py::gil_scoped_release release;
          const Track track = LoadTrackFile(cfg.track_path);
          const ReferencePlan ref = ResolveReference(cfg, track);
          metrics = RunEpisode(MakeScenario(cfg, track, ref), MakeStack(cfg), cfg.rates);
        }
        return ToPython(MetricsToJson(metrics, false));
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{},
      "Runs the episode described by a JSON config and returns its metrics.");

  m.def(
      "overtake_table",
      [](const std::string& path, const std::vector<std::string>& overrides) {
        const RunConfig cfg = LoadRunConfig(path, overrides);
        py::gil_scoped_release release;
        return OvertakeTable(OvertakeStudy(cfg.overtake, MakeStack(cfg), cfg.rates));
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{});
}
