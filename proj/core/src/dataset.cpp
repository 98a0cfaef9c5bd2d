#include "rulebench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "rulebench/error.hpp"
#include "rulebench/text_io.hpp"

namespace rulebench {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kMapSchema = "rulebench.map/1";
constexpr const char* kScenarioSchema = "rulebench.scenario/1";
constexpr const char* kRealizationSchema = "rulebench.realization/1";

json points_to_json(const std::vector<Vec2>& pts) {
  json arr = json::array();
  for (const Vec2 p : pts) arr.push_back(json::array({p.x, p.y}));
  return arr;
}

std::vector<Vec2> points_from_json(const json& arr) {
  std::vector<Vec2> pts;
  pts.reserve(arr.size());
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2) throw json::other_error::create(501, "point must be [x, y]", &p);
    pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  return pts;
}

json agent_to_json(const Agent& agent) {
  json samples = json::array();
  for (const auto& s : agent.trajectory.samples()) {
    samples.push_back(json::array({s.t, s.x, s.y, s.heading, s.speed}));
  }
  return json{{"id", agent.id},
              {"kind", std::string(to_string(agent.kind))},
              {"length_m", agent.footprint.length},
              {"width_m", agent.footprint.width},
              {"trajectory",
               {{"columns", json::array({"t_s", "x_m", "y_m", "heading_rad", "speed_mps"})},
                {"samples", std::move(samples)}}}};
}

Agent agent_from_json(const json& j) {
  Agent agent;
  agent.id = j.at("id").get<std::string>();
  agent.kind = agent_kind_from_string(j.at("kind").get<std::string>());
  agent.footprint.length = j.at("length_m").get<double>();
  agent.footprint.width = j.at("width_m").get<double>();
  const auto& traj = j.at("trajectory");
  const auto& columns = traj.at("columns");
  const std::vector<std::string> expected{"t_s", "x_m", "y_m", "heading_rad", "speed_mps"};
  if (columns.get<std::vector<std::string>>() != expected) {
    throw json::other_error::create(501, "trajectory columns must be [t_s, x_m, y_m, heading_rad, speed_mps]",
                                    &columns);
  }
  std::vector<TrajectorySample> samples;
  for (const auto& row : traj.at("samples")) {
    if (!row.is_array() || row.size() != 5) throw json::other_error::create(501, "sample must have 5 values", &row);
    samples.push_back({row.at(0).get<double>(), row.at(1).get<double>(), row.at(2).get<double>(),
                       row.at(3).get<double>(), row.at(4).get<double>()});
  }
  agent.trajectory = Trajectory(std::move(samples));
  return agent;
}

json map_to_json(const Map& map) {
  json drivable = json::array();
  for (const auto& poly : map.drivable_area) drivable.push_back(points_to_json(poly));
  json lanes = json::array();
  for (const auto& lane : map.lanes) {
    lanes.push_back({{"id", lane.id},
                     {"centerline_m", points_to_json(lane.centerline)},
                     {"left_boundary_m", points_to_json(lane.left_boundary)},
                     {"right_boundary_m", points_to_json(lane.right_boundary)},
                     {"successor_ids", lane.successor_ids}});
  }
  json crosswalks = json::array();
  for (const auto& cw : map.crosswalks) crosswalks.push_back(points_to_json(cw));
  json zones = json::array();
  for (const auto& zone : map.speed_limit_zones) {
    zones.push_back({{"polygon_m", points_to_json(zone.area)}, {"limit_mps", zone.limit}});
  }
  return json{{"schema", kMapSchema},   {"id", map.id},
              {"drivable_area_m", std::move(drivable)}, {"lanes", std::move(lanes)},
              {"crosswalks_m", std::move(crosswalks)},  {"speed_limit_zones", std::move(zones)}};
}

Map map_from_json(const json& j) {
  Map map;
  map.id = j.at("id").get<std::string>();
  for (const auto& poly : j.at("drivable_area_m")) map.drivable_area.push_back(points_from_json(poly));
  for (const auto& l : j.at("lanes")) {
    Lane lane;
    lane.id = l.at("id").get<std::string>();
    lane.centerline = points_from_json(l.at("centerline_m"));
    lane.left_boundary = points_from_json(l.at("left_boundary_m"));
    lane.right_boundary = points_from_json(l.at("right_boundary_m"));
    lane.successor_ids = l.value("successor_ids", std::vector<std::string>{});
    map.lanes.push_back(std::move(lane));
  }
  if (j.contains("crosswalks_m")) {
    for (const auto& cw : j.at("crosswalks_m")) map.crosswalks.push_back(points_from_json(cw));
  }
  if (j.contains("speed_limit_zones")) {
    for (const auto& z : j.at("speed_limit_zones")) {
      map.speed_limit_zones.push_back({points_from_json(z.at("polygon_m")), z.at("limit_mps").get<double>()});
    }
  }
  return map;
}

json scenario_to_json(const Scenario& scenario) {
  json agents = json::array();
  for (const auto& a : scenario.agents) agents.push_back(agent_to_json(a));
  json zones = json::array();
  for (const auto& z : scenario.conflict_zones) {
    zones.push_back({{"id", z.id}, {"polygon_m", points_to_json(z.area)}, {"right_of_way_agent_id", z.agent_id}});
  }
  return json{{"schema", kScenarioSchema},
              {"id", scenario.id},
              {"map_id", scenario.map_id},
              {"duration_s", scenario.duration},
              {"agents", std::move(agents)},
              {"conflict_zones", std::move(zones)}};
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.id = j.at("id").get<std::string>();
  s.map_id = j.at("map_id").get<std::string>();
  s.duration = j.at("duration_s").get<double>();
  for (const auto& a : j.at("agents")) s.agents.push_back(agent_from_json(a));
  if (j.contains("conflict_zones")) {
    for (const auto& z : j.at("conflict_zones")) {
      s.conflict_zones.push_back({z.at("id").get<std::string>(), points_from_json(z.at("polygon_m")),
                                  z.at("right_of_way_agent_id").get<std::string>()});
    }
  }
  return s;
}

json realization_to_json(const Realization& r) {
  return json{{"schema", kRealizationSchema},
              {"id", r.id},
              {"scenario_id", r.scenario_id},
              {"ego", agent_to_json(r.ego)}};
}

Realization realization_from_json(const json& j) {
  Realization r;
  r.id = j.at("id").get<std::string>();
  r.scenario_id = j.at("scenario_id").get<std::string>();
  r.ego = agent_from_json(j.at("ego"));
  return r;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

template <class T, class F>
T parse_with(std::string_view text, const std::string& source, F&& from_json) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(source + ":" + std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw ParseError(source + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(source + ": " + e.what());
  }
}

std::vector<std::filesystem::path> json_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) return files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

template <class T>
const T* find_by_id(const std::vector<T>& items, std::string_view id) {
  for (const auto& item : items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

}  // namespace

const Map& Dataset::map(std::string_view id) const {
  if (const auto* m = find_by_id(maps, id)) return *m;
  throw LinkError("unknown map_id '" + std::string(id) + "'");
}

const Scenario& Dataset::scenario(std::string_view id) const {
  if (const auto* s = find_by_id(scenarios, id)) return *s;
  throw LinkError("unknown scenario_id '" + std::string(id) + "'");
}

const Realization& Dataset::realization(std::string_view id) const {
  if (const auto* r = find_by_id(realizations, id)) return *r;
  throw LinkError("unknown realization_id '" + std::string(id) + "'");
}

const Realization* Dataset::find_realization(std::string_view id) const { return find_by_id(realizations, id); }
const Scenario* Dataset::find_scenario(std::string_view id) const { return find_by_id(scenarios, id); }

void Dataset::link_and_validate() const {
  std::set<std::string> seen;
  for (const auto& m : maps) {
    if (!seen.insert("map:" + m.id).second) throw LinkError("duplicate map id '" + m.id + "'");
    validate(m);
  }
  for (const auto& s : scenarios) {
    if (!seen.insert("scenario:" + s.id).second) throw LinkError("duplicate scenario id '" + s.id + "'");
    if (find_by_id(maps, s.map_id) == nullptr) {
      throw LinkError("scenario '" + s.id + "' references unknown map_id '" + s.map_id + "'");
    }
    validate(s, map(s.map_id));
  }
  for (const auto& r : realizations) {
    if (!seen.insert("realization:" + r.id).second) throw LinkError("duplicate realization id '" + r.id + "'");
    if (find_by_id(scenarios, r.scenario_id) == nullptr) {
      throw LinkError("realization '" + r.id + "' references unknown scenario_id '" + r.scenario_id + "'");
    }
    validate(r, scenario(r.scenario_id));
  }
}

Dataset load_dataset(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw ParseError("dataset root '" + root.string() + "' is not a directory");
  Dataset ds;
  for (const auto& f : json_files(root / "maps")) {
    ds.maps.push_back(parse_with<Map>(read_file(f), f.string(), map_from_json));
  }
  for (const auto& f : json_files(root / "scenarios")) {
    ds.scenarios.push_back(parse_with<Scenario>(read_file(f), f.string(), scenario_from_json));
  }
  for (const auto& f : json_files(root / "realizations")) {
    ds.realizations.push_back(parse_with<Realization>(read_file(f), f.string(), realization_from_json));
  }
  ds.link_and_validate();
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& root) {
  for (const auto& m : dataset.maps) {
    write_file_atomic(root / "maps" / (m.id + ".json"), map_to_json(m).dump(1) + "\n");
  }
  for (const auto& s : dataset.scenarios) {
    write_file_atomic(root / "scenarios" / (s.id + ".json"), scenario_to_json(s).dump(1) + "\n");
  }
  for (const auto& r : dataset.realizations) {
    write_file_atomic(root / "realizations" / (r.id + ".json"), realization_to_json(r).dump(1) + "\n");
  }
}

std::string to_json_string(const Map& map) { return map_to_json(map).dump(1); }
std::string to_json_string(const Scenario& scenario) { return scenario_to_json(scenario).dump(1); }
std::string to_json_string(const Realization& realization) { return realization_to_json(realization).dump(1); }

Map map_from_json_string(std::string_view text, const std::string& source) {
  return parse_with<Map>(text, source, map_from_json);
}
Scenario scenario_from_json_string(std::string_view text, const std::string& source) {
  return parse_with<Scenario>(text, source, scenario_from_json);
}
Realization realization_from_json_string(std::string_view text, const std::string& source) {
  return parse_with<Realization>(text, source, realization_from_json);
}

std::string playback_json(const Dataset& dataset, std::string_view realization_id, double step) {
  const auto* found = dataset.find_realization(realization_id);
  if (found == nullptr) throw LookupError("unknown realization '" + std::string(realization_id) + "'");
  const auto& r = *found;
  const auto& s = dataset.scenario(r.scenario_id);
  const auto& m = dataset.map(s.map_id);
  auto poses = [&](const Agent& a) {
    json out = json::array();
    const double t0 = a.trajectory.start_time();
    const double t1 = a.trajectory.end_time();
    const auto n = static_cast<long>(std::floor((t1 - t0) / step + 1e-9));
    for (long k = 0; k <= n; ++k) {
      const double t = t0 + static_cast<double>(k) * step;
      const Pose p = sample_pose(a.trajectory, t);
      out.push_back(json::array({t, p.x, p.y, p.heading, p.speed}));
    }
    return out;
  };
  auto agent_payload = [&](const Agent& a) {
    return json{{"id", a.id},
                {"kind", std::string(to_string(a.kind))},
                {"length_m", a.footprint.length},
                {"width_m", a.footprint.width},
                {"pose_columns", json::array({"t_s", "x_m", "y_m", "heading_rad", "speed_mps"})},
                {"poses", poses(a)}};
  };
  json agents = json::array();
  for (const auto& a : s.agents) agents.push_back(agent_payload(a));
  json payload{{"realization_id", r.id},  {"scenario_id", s.id},       {"duration_s", s.duration},
               {"map", map_to_json(m)},   {"ego", agent_payload(r.ego)}, {"agents", std::move(agents)}};
  return payload.dump();
}

}  // namespace rulebench
