#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rulebench/dataset.hpp"
#include "rulebench/model.hpp"
#include "rulebench/rulebook.hpp"

namespace rulebench::testing {

// East-west road along y = 0, 3.5 m lanes: eastbound "east_1" at y = -1.75,
// westbound "west_1" at y = 1.75. Drivable area is [x0, x1] x [-3.5, 3.5].
Map two_lane_road(const std::string& id = "road", double x0 = -100.0, double x1 = 400.0);

// Constant-velocity samples every `step` over [t0, t1].
Trajectory constant_velocity(double t0, double t1, double x0, double y0, double heading, double speed,
                             double step = 0.1);
Trajectory stationary(double t0, double t1, double x, double y, double heading = 0.0);

Agent make_agent(const std::string& id, AgentKind kind, Trajectory trajectory, double length = 4.5,
                 double width = 2.0);

// One map, one scenario, one realization.
struct World {
  Map map;
  Scenario scenario;
  Realization realization;
};

World make_world(Map map, std::vector<Agent> agents, Trajectory ego, double duration);

// Relation matrix, le[i][j] == true iff rule i <= rule j.
using Relation = std::vector<std::vector<bool>>;

// Every reflexive, transitive relation over n elements.
std::vector<Relation> all_preorders(std::size_t n);

// Rulebook declaring r1..rn whose edges are exactly the off-diagonal pairs of
// `le`.
Rulebook rulebook_from_relation(const Relation& le);

// Comparison outcome computed by enumerating the relation's reachability with
// a depth-first search; written independently of Rulebook::compare.
Outcome oracle_compare(const Relation& edges, std::span<const double> v1, std::span<const double> v2);

}  // namespace rulebench::testing
