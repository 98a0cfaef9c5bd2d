#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rulebench/geometry.hpp"

namespace rulebench {

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // rad
  double speed = 0.0;    // m/s

  Vec2 position() const { return {x, y}; }
  Vec2 velocity() const { return speed * unit_from_heading(heading); }
};

struct TrajectorySample {
  double t = 0.0;  // s
  double x = 0.0;  // m
  double y = 0.0;  // m
  double heading = 0.0;
  double speed = 0.0;

  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

// Time-parameterized path. Timestamps strictly increase; all values finite;
// speed >= 0. Enforced on construction.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TrajectorySample> samples);

  std::span<const TrajectorySample> samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }
  double start_time() const;
  double end_time() const;
  bool covers(double t) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::vector<TrajectorySample> samples_;
};

// Piecewise-linear interpolation of position and speed; heading along the
// shorter arc. Throws RangeError outside [start, end].
Pose sample_pose(const Trajectory& trajectory, double t);

enum class AgentKind { vehicle, pedestrian, parked_vehicle };

std::string_view to_string(AgentKind kind);
AgentKind agent_kind_from_string(std::string_view s);

struct Footprint {
  double length = 4.5;  // m, along heading
  double width = 2.0;   // m

  friend bool operator==(const Footprint&, const Footprint&) = default;
};

struct Agent {
  std::string id;
  AgentKind kind = AgentKind::vehicle;
  Footprint footprint;
  Trajectory trajectory;

  bool is_vehicle() const { return kind == AgentKind::vehicle || kind == AgentKind::parked_vehicle; }
  friend bool operator==(const Agent&, const Agent&) = default;
};

OrientedRect footprint_at(const Agent& agent, double t);

// Centerline points are ordered along the direction of travel.
struct Lane {
  std::string id;
  Polyline centerline;
  Polyline left_boundary;
  Polyline right_boundary;
  std::vector<std::string> successor_ids;

  friend bool operator==(const Lane&, const Lane&) = default;
};

struct SpeedLimitZone {
  Polygon area;
  double limit = 0.0;  // m/s

  friend bool operator==(const SpeedLimitZone&, const SpeedLimitZone&) = default;
};

struct Map {
  std::string id;
  std::vector<Polygon> drivable_area;  // union of simple polygons
  std::vector<Lane> lanes;
  std::vector<Polygon> crosswalks;
  std::vector<SpeedLimitZone> speed_limit_zones;

  bool on_drivable_area(Vec2 p) const;  // boundary counts as on
  // Distance from p to the drivable area; 0 when p lies on it.
  double distance_to_drivable_area(Vec2 p) const;
  // Lowest limit among zones containing p; nullopt when none applies.
  std::optional<double> speed_limit_at(Vec2 p) const;
  const Lane* find_lane(std::string_view lane_id) const;

  friend bool operator==(const Map&, const Map&) = default;
};

// Region where the named agent holds right of way over ego.
struct ConflictZone {
  std::string id;
  Polygon area;
  std::string agent_id;

  friend bool operator==(const ConflictZone&, const ConflictZone&) = default;
};

// A map populated with non-reactive agents. An agent's trajectory may cover a
// sub-interval of [0, duration]; the agent is absent outside it.
struct Scenario {
  std::string id;
  std::string map_id;
  std::vector<Agent> agents;
  std::vector<ConflictZone> conflict_zones;
  double duration = 0.0;

  const Agent* find_agent(std::string_view agent_id) const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Realization {
  std::string id;
  std::string scenario_id;
  Agent ego;

  friend bool operator==(const Realization&, const Realization&) = default;
};

// Invariant checks; throw ValidationError naming the offending object.
void validate(const Map& map);
void validate(const Scenario& scenario, const Map& map);
void validate(const Realization& realization, const Scenario& scenario);

// Reflection about the vertical line x = axis_x. Lane left/right boundaries
// swap roles so that they stay on the geometric left/right of travel.
Trajectory mirror(const Trajectory& trajectory, double axis_x);
Map mirror(const Map& map, double axis_x);
Scenario mirror(const Scenario& scenario, double axis_x);
Realization mirror(const Realization& realization, double axis_x);

}  // namespace rulebench
