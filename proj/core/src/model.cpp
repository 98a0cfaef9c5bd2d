#include "rulebench/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rulebench/error.hpp"

namespace rulebench {

Trajectory::Trajectory(std::vector<TrajectorySample> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y) ||
        !std::isfinite(s.heading) || !std::isfinite(s.speed)) {
      throw ValidationError("trajectory sample " + std::to_string(i) + " has a non-finite value");
    }
    if (s.speed < 0.0) {
      throw ValidationError("trajectory sample " + std::to_string(i) + " has negative speed");
    }
    if (i > 0 && !(s.t > samples_[i - 1].t)) {
      throw ValidationError("trajectory timestamps must strictly increase (sample " +
                            std::to_string(i) + ")");
    }
  }
}

double Trajectory::start_time() const {
  if (samples_.empty()) throw RangeError("empty trajectory");
  return samples_.front().t;
}

double Trajectory::end_time() const {
  if (samples_.empty()) throw RangeError("empty trajectory");
  return samples_.back().t;
}

bool Trajectory::covers(double t) const {
  return !samples_.empty() && t >= samples_.front().t && t <= samples_.back().t;
}

Pose sample_pose(const Trajectory& trajectory, double t) {
  const auto samples = trajectory.samples();
  if (!trajectory.covers(t)) {
    std::ostringstream os;
    os << "time " << t << " s outside trajectory range";
    if (!samples.empty()) os << " [" << samples.front().t << ", " << samples.back().t << "]";
    throw RangeError(os.str());
  }
  // First sample with timestamp > t.
  auto it = std::upper_bound(samples.begin(), samples.end(), t,
                             [](double value, const TrajectorySample& s) { return value < s.t; });
  if (it == samples.end()) {
    const auto& last = samples.back();
    return {last.x, last.y, last.heading, last.speed};
  }
  const auto& b = *it;
  const auto& a = *(it - 1);
  if (a.t == t) return {a.x, a.y, a.heading, a.speed};
  const double s = (t - a.t) / (b.t - a.t);
  return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), wrap_angle(lerp_angle(a.heading, b.heading, s)),
          a.speed + s * (b.speed - a.speed)};
}

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::vehicle:
      return "vehicle";
    case AgentKind::pedestrian:
      return "pedestrian";
    case AgentKind::parked_vehicle:
      return "parked_vehicle";
  }
  return "vehicle";
}

AgentKind agent_kind_from_string(std::string_view s) {
  if (s == "vehicle") return AgentKind::vehicle;
  if (s == "pedestrian") return AgentKind::pedestrian;
  if (s == "parked_vehicle") return AgentKind::parked_vehicle;
  throw ParseError("unknown agent kind '" + std::string(s) + "'");
}

OrientedRect footprint_at(const Agent& agent, double t) {
  const Pose p = sample_pose(agent.trajectory, t);
  return {p.position(), p.heading, agent.footprint.length, agent.footprint.width};
}

bool Map::on_drivable_area(Vec2 p) const {
  return std::any_of(drivable_area.begin(), drivable_area.end(),
                     [p](const Polygon& poly) { return point_in_polygon(p, poly) || distance_to_boundary(p, poly) <= 1e-9; });
}

double Map::distance_to_drivable_area(Vec2 p) const {
  if (on_drivable_area(p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& poly : drivable_area) best = std::min(best, distance_to_boundary(p, poly));
  return best;
}

std::optional<double> Map::speed_limit_at(Vec2 p) const {
  std::optional<double> limit;
  for (const auto& zone : speed_limit_zones) {
    if (point_in_polygon(p, zone.area)) {
      limit = limit ? std::min(*limit, zone.limit) : zone.limit;
    }
  }
  return limit;
}

const Lane* Map::find_lane(std::string_view lane_id) const {
  for (const auto& lane : lanes) {
    if (lane.id == lane_id) return &lane;
  }
  return nullptr;
}

const Agent* Scenario::find_agent(std::string_view agent_id) const {
  for (const auto& agent : agents) {
    if (agent.id == agent_id) return &agent;
  }
  return nullptr;
}

namespace {

void validate_footprint(const Agent& agent, const std::string& owner) {
  if (!(agent.footprint.length > 0.0) || !(agent.footprint.width > 0.0)) {
    throw ValidationError(owner + ": agent '" + agent.id + "' footprint dimensions must be > 0");
  }
  if (agent.trajectory.empty()) {
    throw ValidationError(owner + ": agent '" + agent.id + "' has an empty trajectory");
  }
}

}  // namespace

void validate(const Map& map) {
  const std::string owner = "map '" + map.id + "'";
  for (std::size_t i = 0; i < map.drivable_area.size(); ++i) {
    if (!polygon_is_simple(map.drivable_area[i])) {
      throw ValidationError(owner + ": drivable polygon " + std::to_string(i) + " is not simple");
    }
  }
  for (const auto& zone : map.speed_limit_zones) {
    if (!(zone.limit > 0.0)) throw ValidationError(owner + ": speed limits must be > 0");
    if (!polygon_is_simple(zone.area)) throw ValidationError(owner + ": speed zone polygon is not simple");
  }
  for (const auto& cw : map.crosswalks) {
    if (!polygon_is_simple(cw)) throw ValidationError(owner + ": crosswalk polygon is not simple");
  }
  for (const auto& lane : map.lanes) {
    if (lane.centerline.size() < 2 || lane.left_boundary.size() < 2 || lane.right_boundary.size() < 2) {
      throw ValidationError(owner + ": lane '" + lane.id + "' needs >= 2 points per polyline");
    }
    for (const Vec2 p : lane.centerline) {
      if (!map.on_drivable_area(p)) {
        // Points exactly on a polygon edge count as inside.
        if (map.distance_to_drivable_area(p) > 1e-9) {
          throw ValidationError(owner + ": lane '" + lane.id + "' centerline leaves the drivable area");
        }
      }
    }
    const auto left = project_onto_polyline(lane.centerline, lane.left_boundary[lane.left_boundary.size() / 2]);
    const auto right =
        project_onto_polyline(lane.centerline, lane.right_boundary[lane.right_boundary.size() / 2]);
    if (!(left.lateral * right.lateral < 0.0)) {
      throw ValidationError(owner + ": lane '" + lane.id + "' boundaries are not on opposite sides");
    }
  }
}

void validate(const Scenario& scenario, const Map& map) {
  const std::string owner = "scenario '" + scenario.id + "'";
  if (scenario.map_id != map.id) {
    throw ValidationError(owner + " references map '" + scenario.map_id + "', got '" + map.id + "'");
  }
  if (!(scenario.duration > 0.0)) throw ValidationError(owner + ": duration must be > 0");
  constexpr double eps = 1e-9;
  for (const auto& agent : scenario.agents) {
    validate_footprint(agent, owner);
    if (agent.trajectory.start_time() < -eps || agent.trajectory.end_time() > scenario.duration + eps) {
      throw ValidationError(owner + ": agent '" + agent.id + "' trajectory leaves [0, duration]");
    }
    if (agent.kind == AgentKind::parked_vehicle) {
      const auto s = agent.trajectory.samples();
      for (const auto& sample : s) {
        if (sample.x != s.front().x || sample.y != s.front().y || sample.heading != s.front().heading ||
            sample.speed != 0.0) {
          throw ValidationError(owner + ": parked vehicle '" + agent.id + "' must be stationary");
        }
      }
    }
  }
  for (const auto& zone : scenario.conflict_zones) {
    if (scenario.find_agent(zone.agent_id) == nullptr) {
      throw ValidationError(owner + ": conflict zone '" + zone.id + "' references unknown agent '" +
                            zone.agent_id + "'");
    }
    if (!polygon_is_simple(zone.area)) {
      throw ValidationError(owner + ": conflict zone '" + zone.id + "' polygon is not simple");
    }
  }
}

void validate(const Realization& realization, const Scenario& scenario) {
  const std::string owner = "realization '" + realization.id + "'";
  if (realization.scenario_id != scenario.id) {
    throw ValidationError(owner + " references scenario '" + realization.scenario_id + "'");
  }
  if (realization.ego.kind != AgentKind::vehicle) throw ValidationError(owner + ": ego must be a vehicle");
  validate_footprint(realization.ego, owner);
  constexpr double eps = 1e-9;
  if (realization.ego.trajectory.start_time() > eps ||
      realization.ego.trajectory.end_time() < scenario.duration - eps) {
    throw ValidationError(owner + ": ego trajectory must cover [0, duration]");
  }
}

namespace {

Vec2 mirror_point(Vec2 p, double axis_x) { return {2.0 * axis_x - p.x, p.y}; }

Polyline mirror_points(const Polyline& pts, double axis_x) {
  Polyline out;
  out.reserve(pts.size());
  for (const Vec2 p : pts) out.push_back(mirror_point(p, axis_x));
  return out;
}

// Reflection reverses orientation; restore counter-clockwise order.
Polygon mirror_polygon(const Polygon& poly, double axis_x) {
  Polygon out = mirror_points(poly, axis_x);
  std::reverse(out.begin(), out.end());
  return out;
}

Agent mirror_agent(const Agent& agent, double axis_x) {
  Agent out = agent;
  out.trajectory = mirror(agent.trajectory, axis_x);
  return out;
}

}  // namespace

Trajectory mirror(const Trajectory& trajectory, double axis_x) {
  std::vector<TrajectorySample> out;
  out.reserve(trajectory.samples().size());
  for (const auto& s : trajectory.samples()) {
    out.push_back({s.t, 2.0 * axis_x - s.x, s.y, wrap_angle(std::numbers::pi - s.heading), s.speed});
  }
  return Trajectory(std::move(out));
}

Map mirror(const Map& map, double axis_x) {
  Map out;
  out.id = map.id;
  for (const auto& poly : map.drivable_area) out.drivable_area.push_back(mirror_polygon(poly, axis_x));
  for (const auto& cw : map.crosswalks) out.crosswalks.push_back(mirror_polygon(cw, axis_x));
  for (const auto& zone : map.speed_limit_zones) {
    out.speed_limit_zones.push_back({mirror_polygon(zone.area, axis_x), zone.limit});
  }
  for (const auto& lane : map.lanes) {
    Lane l;
    l.id = lane.id;
    l.centerline = mirror_points(lane.centerline, axis_x);
    l.left_boundary = mirror_points(lane.right_boundary, axis_x);
    l.right_boundary = mirror_points(lane.left_boundary, axis_x);
    l.successor_ids = lane.successor_ids;
    out.lanes.push_back(std::move(l));
  }
  return out;
}

Scenario mirror(const Scenario& scenario, double axis_x) {
  Scenario out = scenario;
  for (auto& agent : out.agents) agent = mirror_agent(agent, axis_x);
  for (auto& zone : out.conflict_zones) zone.area = mirror_polygon(zone.area, axis_x);
  return out;
}

Realization mirror(const Realization& realization, double axis_x) {
  Realization out = realization;
  out.ego = mirror_agent(realization.ego, axis_x);
  return out;
}

}  // namespace rulebench
