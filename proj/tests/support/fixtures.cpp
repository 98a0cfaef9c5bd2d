#include "fixtures.hpp"

#include <cmath>
#include <functional>

namespace rulebench::testing {

Map two_lane_road(const std::string& id, double x0, double x1) {
  Map m;
  m.id = id;
  m.drivable_area.push_back({{x0, -3.5}, {x1, -3.5}, {x1, 3.5}, {x0, 3.5}});
  Lane east;
  east.id = "east_1";
  east.centerline = {{x0, -1.75}, {x1, -1.75}};
  east.left_boundary = {{x0, 0.0}, {x1, 0.0}};
  east.right_boundary = {{x0, -3.5}, {x1, -3.5}};
  Lane west;
  west.id = "west_1";
  west.centerline = {{x1, 1.75}, {x0, 1.75}};
  west.left_boundary = {{x1, 0.0}, {x0, 0.0}};
  west.right_boundary = {{x1, 3.5}, {x0, 3.5}};
  m.lanes = {east, west};
  return m;
}

Trajectory constant_velocity(double t0, double t1, double x0, double y0, double heading, double speed, double step) {
  std::vector<TrajectorySample> s;
  const auto n = static_cast<std::size_t>(std::llround((t1 - t0) / step));
  for (std::size_t k = 0; k <= n; ++k) {
    const double dt = static_cast<double>(k) * step;
    s.push_back({t0 + dt, x0 + speed * dt * std::cos(heading), y0 + speed * dt * std::sin(heading), heading, speed});
  }
  return Trajectory(std::move(s));
}

Trajectory stationary(double t0, double t1, double x, double y, double heading) {
  return Trajectory({{t0, x, y, heading, 0.0}, {t1, x, y, heading, 0.0}});
}

Agent make_agent(const std::string& id, AgentKind kind, Trajectory trajectory, double length, double width) {
  Agent a;
  a.id = id;
  a.kind = kind;
  a.footprint = {length, width};
  a.trajectory = std::move(trajectory);
  return a;
}

World make_world(Map map, std::vector<Agent> agents, Trajectory ego, double duration) {
  World w;
  w.map = std::move(map);
  w.scenario.id = "sc";
  w.scenario.map_id = w.map.id;
  w.scenario.agents = std::move(agents);
  w.scenario.duration = duration;
  w.realization.id = "sc_w0";
  w.realization.scenario_id = "sc";
  w.realization.ego = make_agent("ego", AgentKind::vehicle, std::move(ego));
  return w;
}

std::vector<Relation> all_preorders(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) cells.emplace_back(i, j);
  std::vector<Relation> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << cells.size()); ++mask) {
    Relation le(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) le[i][i] = true;
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (mask >> c & 1U) le[cells[c].first][cells[c].second] = true;
    bool transitive = true;
    for (std::size_t i = 0; i < n && transitive; ++i)
      for (std::size_t j = 0; j < n && transitive; ++j)
        for (std::size_t k = 0; k < n && transitive; ++k)
          if (le[i][j] && le[j][k] && !le[i][k]) transitive = false;
    if (transitive) out.push_back(std::move(le));
  }
  return out;
}

Rulebook rulebook_from_relation(const Relation& le) {
  std::vector<RuleDecl> rules;
  std::vector<PriorityEdge> edges;
  for (std::size_t i = 0; i < le.size(); ++i) rules.push_back({"r" + std::to_string(i + 1), "rule"});
  for (std::size_t i = 0; i < le.size(); ++i)
    for (std::size_t j = 0; j < le.size(); ++j)
      if (i != j && le[i][j]) edges.push_back({rules[i].id, rules[j].id});
  return Rulebook(std::move(rules), std::move(edges));
}

Outcome oracle_compare(const Relation& edges, std::span<const double> v1, std::span<const double> v2) {
  const std::size_t n = edges.size();
  // reach[i][j]: j reachable from i along edges (i <= j).
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t s = 0; s < n; ++s) {
    std::function<void(std::size_t)> dfs = [&](std::size_t u) {
      if (reach[s][u]) return;
      reach[s][u] = true;
      for (std::size_t v = 0; v < n; ++v)
        if (edges[u][v]) dfs(v);
    };
    dfs(s);
  }
  auto below = [&](std::size_t i, std::size_t j) { return reach[i][j] && !reach[j][i]; };
  auto maximal = [&](std::span<const double> v) {
    std::vector<std::size_t> m;
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] <= 0.0) continue;
      bool top = true;
      for (std::size_t j = 0; j < n; ++j)
        if (v[j] > 0.0 && below(i, j)) top = false;
      if (top) m.push_back(i);
    }
    return m;
  };
  const auto m1 = maximal(v1);
  const auto m2 = maximal(v2);
  if (m1.empty() && m2.empty()) return Outcome::incomparable;
  if (m1.size() == 1 && m2.size() == 1 && m1[0] == m2[0]) {
    if (v1[m1[0]] < v2[m1[0]]) return Outcome::first_preferred;
    if (v2[m1[0]] < v1[m1[0]]) return Outcome::second_preferred;
    return Outcome::incomparable;
  }
  // Every rule of `a` sits strictly below some rule of `b`. An empty `a`
  // satisfies this vacuously: no violations beat any violation.
  auto dominated = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (const auto i : a) {
      bool found = false;
      for (const auto j : b) found = found || below(i, j);
      if (!found) return false;
    }
    return true;
  };
  const bool first = dominated(m1, m2);
  const bool second = dominated(m2, m1);
  if (first && !second) return Outcome::first_preferred;
  if (second && !first) return Outcome::second_preferred;
  return Outcome::incomparable;
}

}  // namespace rulebench::testing
