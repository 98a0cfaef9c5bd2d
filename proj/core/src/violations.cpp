#include "rulebench/violations.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "rulebench/error.hpp"
#include "rulebench/text_io.hpp"

namespace rulebench {

namespace {

constexpr std::array<std::string_view, kRuleCount> kTitles{
    "Avoid collisions with VRUs",
    "Avoid collisions with vehicles",
    "Stay in the drivable area",
    "Maintain clearance with pedestrians off the road",
    "Maintain clearance with pedestrians on the road",
    "Signal intent to maintain clearance with VRU on direct path",
    "Yield to vehicles",
    "Drive on the correct side of the road",
    "Maintain clearance with parked car",
    "Maintain clearance with vehicles on the right",
    "Maintain clearance with vehicles on the left",
    "Maintain clearance with vehicles on the front",
    "Drive under the speed limit",
    "Stay in lane",
};

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

struct AgentState {
  const Agent* agent = nullptr;
  Pose pose;
  OrientedRect rect;
};

struct Frame {
  double t = 0.0;
  Pose ego_pose;
  OrientedRect ego;
  double ego_accel = 0.0;  // dv/dt
  std::vector<AgentState> agents;
};

// Ego and every present agent sampled on the fixed evaluation grid.
struct Timeline {
  const Realization* realization = nullptr;
  const Scenario* scenario = nullptr;
  const Map* map = nullptr;
  const RuleParams* params = nullptr;
  std::vector<Frame> frames;
};

Timeline build_timeline(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  p.validate();
  Timeline tl{&w, &s, &m, &p, {}};
  const auto& traj = w.ego.trajectory;
  const double t0 = traj.start_time();
  const double t1 = traj.end_time();
  const auto steps = static_cast<long>(std::floor((t1 - t0) / p.dt + 1e-9));
  tl.frames.reserve(static_cast<std::size_t>(steps + 1));
  for (long k = 0; k <= steps; ++k) {
    Frame f;
    f.t = t0 + static_cast<double>(k) * p.dt;
    f.ego_pose = sample_pose(traj, f.t);
    f.ego = {f.ego_pose.position(), f.ego_pose.heading, w.ego.footprint.length, w.ego.footprint.width};
    if (f.t + p.dt <= t1) {
      f.ego_accel = (sample_pose(traj, f.t + p.dt).speed - f.ego_pose.speed) / p.dt;
    } else if (f.t - p.dt >= t0) {
      f.ego_accel = (f.ego_pose.speed - sample_pose(traj, f.t - p.dt).speed) / p.dt;
    }
    for (const auto& agent : s.agents) {
      if (!agent.trajectory.covers(f.t)) continue;
      const Pose ap = sample_pose(agent.trajectory, f.t);
      f.agents.push_back({&agent, ap, {ap.position(), ap.heading, agent.footprint.length, agent.footprint.width}});
    }
    tl.frames.push_back(std::move(f));
  }
  return tl;
}

template <class G>
double aggregate(const Timeline& tl, G&& g) {
  double sum = 0.0;
  for (const auto& f : tl.frames) {
    const double v = g(f);
    sum += v * v;
  }
  return std::sqrt(sum * tl.params->dt);
}

// Collision events per agent: severity is the relative speed at the first
// overlapping instant; overlap gaps shorter than the debounce merge.
double collision_score(const Timeline& tl, const std::function<bool(const Agent&)>& relevant) {
  const double debounce = tl.params->collision_debounce;
  const double dt = tl.params->dt;
  std::map<const Agent*, double> last_overlap;
  double total = 0.0;
  for (const auto& f : tl.frames) {
    for (const auto& a : f.agents) {
      if (!relevant(*a.agent)) continue;
      if (!overlaps(f.ego, a.rect)) continue;
      auto it = last_overlap.find(a.agent);
      const bool new_event = it == last_overlap.end() || (f.t - it->second - dt) >= debounce - 1e-9;
      if (new_event) total += norm(f.ego_pose.velocity() - a.pose.velocity());
      last_overlap[a.agent] = f.t;
    }
  }
  return total;
}

double r1(const Timeline& tl) {
  return collision_score(tl, [](const Agent& a) { return a.kind == AgentKind::pedestrian; });
}

double r2(const Timeline& tl) {
  return collision_score(tl, [](const Agent& a) { return a.is_vehicle(); });
}

std::vector<Vec2> boundary_probes(const OrientedRect& r, double spacing) {
  const auto c = r.corners();
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 a = c[i];
    const Vec2 b = c[(i + 1) % 4];
    const auto n = std::max<long>(1, static_cast<long>(std::ceil(norm(b - a) / spacing)));
    for (long k = 0; k < n; ++k) pts.push_back(a + (static_cast<double>(k) / static_cast<double>(n)) * (b - a));
  }
  return pts;
}

double r3(const Timeline& tl) {
  const Map& m = *tl.map;
  return aggregate(tl, [&](const Frame& f) {
    double depth = 0.0;
    for (const Vec2 p : boundary_probes(f.ego, tl.params->boundary_probe_spacing)) {
      depth = std::max(depth, m.distance_to_drivable_area(p));
    }
    return depth;
  });
}

double ped_clearance(const Timeline& tl, bool on_road) {
  const auto& p = *tl.params;
  const double c0 = on_road ? p.ped_onroad_c0 : p.ped_offroad_c0;
  const double c1 = on_road ? p.ped_onroad_c1 : p.ped_offroad_c1;
  return aggregate(tl, [&](const Frame& f) {
    double g = 0.0;
    const double threshold = c0 + c1 * f.ego_pose.speed;
    for (const auto& a : f.agents) {
      if (a.agent->kind != AgentKind::pedestrian) continue;
      if (tl.map->on_drivable_area(a.pose.position()) != on_road) continue;
      g = std::max(g, threshold - min_distance(f.ego, a.rect));
    }
    return g;
  });
}

double r6(const Timeline& tl) {
  const auto& p = *tl.params;
  return aggregate(tl, [&](const Frame& f) {
    const double reach = f.ego_pose.speed * p.intent_horizon;
    const Vec2 dir = unit_from_heading(f.ego_pose.heading);
    const OrientedRect corridor{f.ego.center + (0.5 * reach) * dir, f.ego.heading, f.ego.length + reach,
                                f.ego.width};
    bool vru_on_path = false;
    for (const auto& a : f.agents) {
      if (a.agent->kind != AgentKind::pedestrian) continue;
      if (!overlaps(corridor, a.rect)) continue;
      const Vec2 rel_pos = a.pose.position() - f.ego_pose.position();
      const Vec2 rel_vel = a.pose.velocity() - f.ego_pose.velocity();
      if (dot(rel_pos, rel_vel) < 0.0) {
        vru_on_path = true;
        break;
      }
    }
    if (!vru_on_path) return 0.0;
    const double decel = -f.ego_accel;
    return std::max(0.0, p.intent_required_decel - decel);
  });
}

double r7(const Timeline& tl) {
  const double tau = tl.params->yield_time_gap;
  double total = 0.0;
  for (const auto& zone : tl.scenario->conflict_zones) {
    const Agent* holder = tl.scenario->find_agent(zone.agent_id);
    if (holder == nullptr) continue;
    std::vector<double> ego_times;
    double arrival = std::numeric_limits<double>::quiet_NaN();
    double departure = arrival;
    bool agent_inside = false;
    for (const auto& f : tl.frames) {
      if (rect_intersects_polygon(f.ego, zone.area)) ego_times.push_back(f.t);
      bool inside_now = false;
      for (const auto& a : f.agents) {
        if (a.agent == holder && rect_intersects_polygon(a.rect, zone.area)) inside_now = true;
      }
      if (inside_now && std::isnan(arrival)) {
        arrival = f.t;
        agent_inside = true;
      }
      if (agent_inside) {
        if (inside_now) {
          departure = f.t;
        } else {
          agent_inside = false;
        }
      }
    }
    if (std::isnan(arrival)) continue;
    double gap = std::numeric_limits<double>::infinity();
    for (const double t : ego_times) {
      if (t >= arrival && t <= departure) {
        gap = 0.0;
        break;
      }
      if (t < arrival) gap = std::min(gap, arrival - t);
    }
    total += std::max(0.0, tau - gap);
  }
  return total;
}

struct LaneFrame {
  PolylineProjection proj;
  double half_left = 0.0;
  double half_right = 0.0;
};

LaneFrame lane_frame(const Lane& lane, Vec2 p) {
  LaneFrame lf;
  lf.proj = project_onto_polyline(lane.centerline, p);
  for (const Polyline* boundary : {&lane.left_boundary, &lane.right_boundary}) {
    const auto bp = project_onto_polyline(*boundary, lf.proj.foot);
    const double side = cross(lf.proj.tangent, bp.foot - lf.proj.foot);
    if (side >= 0.0) {
      lf.half_left = bp.distance;
    } else {
      lf.half_right = bp.distance;
    }
  }
  return lf;
}

// Signed lateral offsets of the footprint corners in the lane frame.
std::pair<double, double> lateral_extent(const OrientedRect& r, const LaneFrame& lf) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Vec2 c : r.corners()) {
    const double s = cross(lf.proj.tangent, c - lf.proj.foot);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

double r8(const Timeline& tl) {
  const double opposite_cos = std::cos(deg2rad(tl.params->opposite_lane_angle_deg));
  return aggregate(tl, [&](const Frame& f) {
    const Vec2 dir = unit_from_heading(f.ego_pose.heading);
    double overlap = 0.0;
    for (const auto& lane : tl.map->lanes) {
      const LaneFrame lf = lane_frame(lane, f.ego.center);
      if (!lf.proj.interior) continue;
      if (dot(lf.proj.tangent, dir) > opposite_cos) continue;
      const auto [lo, hi] = lateral_extent(f.ego, lf);
      overlap += std::max(0.0, std::min(hi, lf.half_left) - std::max(lo, -lf.half_right));
    }
    return overlap;
  });
}

double r14(const Timeline& tl) {
  const double aligned_cos = std::cos(deg2rad(tl.params->aligned_lane_angle_deg));
  return aggregate(tl, [&](const Frame& f) {
    const Vec2 dir = unit_from_heading(f.ego_pose.heading);
    const Lane* best = nullptr;
    const Lane* best_any = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    double best_any_d = best_d;
    for (const auto& lane : tl.map->lanes) {
      const auto proj = project_onto_polyline(lane.centerline, f.ego.center);
      if (!proj.interior) continue;
      if (proj.distance < best_any_d) {
        best_any_d = proj.distance;
        best_any = &lane;
      }
      if (dot(proj.tangent, dir) >= aligned_cos && proj.distance < best_d) {
        best_d = proj.distance;
        best = &lane;
      }
    }
    if (best == nullptr) best = best_any;
    if (best == nullptr) return 0.0;
    const LaneFrame lf = lane_frame(*best, f.ego.center);
    const auto [lo, hi] = lateral_extent(f.ego, lf);
    return std::max({0.0, hi - lf.half_left, -lf.half_right - lo});
  });
}

enum class Sector { front, left, right, rear };

Sector sector_of(const OrientedRect& ego, const OrientedRect& other, const RuleParams& p) {
  Vec2 target = closest_point_on_rect(other, ego.center);
  if (target == ego.center) target = other.center;
  const Vec2 local = ego.to_local(target);
  const double bearing = std::atan2(local.y, local.x) * 180.0 / std::numbers::pi;
  if (std::abs(bearing) < p.front_half_angle_deg) return Sector::front;
  if (bearing > p.front_half_angle_deg && bearing <= p.side_limit_angle_deg) return Sector::left;
  if (bearing >= -p.side_limit_angle_deg && bearing < -p.front_half_angle_deg) return Sector::right;
  return Sector::rear;
}

double vehicle_clearance(const Timeline& tl, Rule rule) {
  const auto& p = *tl.params;
  return aggregate(tl, [&](const Frame& f) {
    double g = 0.0;
    for (const auto& a : f.agents) {
      if (!a.agent->is_vehicle()) continue;
      const bool parked = a.agent->kind == AgentKind::parked_vehicle;
      double threshold = p.vehicle_lateral_clearance;
      if (rule == Rule::parked_car_clearance) {
        if (!parked) continue;
      } else {
        if (parked) continue;
        const Sector sec = sector_of(f.ego, a.rect, p);
        const Sector wanted = rule == Rule::clearance_right  ? Sector::right
                              : rule == Rule::clearance_left ? Sector::left
                                                             : Sector::front;
        if (sec != wanted) continue;
        if (rule == Rule::clearance_front) threshold = p.vehicle_front_clearance;
      }
      g = std::max(g, threshold - min_distance(f.ego, a.rect));
    }
    return g;
  });
}

double r13(const Timeline& tl) {
  return aggregate(tl, [&](const Frame& f) {
    const auto limit = tl.map->speed_limit_at(f.ego.center);
    if (!limit) return 0.0;
    return std::max(0.0, f.ego_pose.speed - *limit);
  });
}

double score_rule(const Timeline& tl, Rule rule) {
  switch (rule) {
    case Rule::vru_collision:
      return r1(tl);
    case Rule::vehicle_collision:
      return r2(tl);
    case Rule::drivable_area:
      return r3(tl);
    case Rule::ped_clearance_offroad:
      return ped_clearance(tl, false);
    case Rule::ped_clearance_onroad:
      return ped_clearance(tl, true);
    case Rule::signal_intent:
      return r6(tl);
    case Rule::yield:
      return r7(tl);
    case Rule::correct_side:
      return r8(tl);
    case Rule::parked_car_clearance:
    case Rule::clearance_right:
    case Rule::clearance_left:
    case Rule::clearance_front:
      return vehicle_clearance(tl, rule);
    case Rule::speed_limit:
      return r13(tl);
    case Rule::stay_in_lane:
      return r14(tl);
  }
  return 0.0;
}

double score_one(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p, Rule rule) {
  return score_rule(build_timeline(w, s, m, p), rule);
}

}  // namespace

std::string rule_id(std::size_t index) {
  if (index >= kRuleCount) throw LookupError("rule index out of range: " + std::to_string(index));
  return "r" + std::to_string(index + 1);
}

std::string_view rule_title(std::size_t index) {
  if (index >= kRuleCount) throw LookupError("rule index out of range: " + std::to_string(index));
  return kTitles[index];
}

std::size_t rule_index(std::string_view id) {
  if (id.size() >= 2 && id.front() == 'r') {
    try {
      const auto n = parse_int(id.substr(1), "rule id");
      if (n >= 1 && n <= static_cast<long long>(kRuleCount)) return static_cast<std::size_t>(n - 1);
    } catch (const ParseError&) {
    }
  }
  throw LookupError("unknown rule id '" + std::string(id) + "'");
}

bool ViolationVector::is_zero() const {
  return std::all_of(scores.begin(), scores.end(), [](double v) { return v == 0.0; });
}

std::size_t ViolationVector::violated_count() const {
  return static_cast<std::size_t>(std::count_if(scores.begin(), scores.end(), [](double v) { return v > 0.0; }));
}

void RuleParams::validate() const {
  const std::array<std::pair<const char*, double>, 14> positive{{
      {"dt", dt},
      {"ped_offroad_c0", ped_offroad_c0},
      {"ped_onroad_c0", ped_onroad_c0},
      {"vehicle_lateral_clearance", vehicle_lateral_clearance},
      {"vehicle_front_clearance", vehicle_front_clearance},
      {"intent_horizon", intent_horizon},
      {"intent_required_decel", intent_required_decel},
      {"yield_time_gap", yield_time_gap},
      {"collision_debounce", collision_debounce},
      {"front_half_angle_deg", front_half_angle_deg},
      {"side_limit_angle_deg", side_limit_angle_deg},
      {"opposite_lane_angle_deg", opposite_lane_angle_deg},
      {"aligned_lane_angle_deg", aligned_lane_angle_deg},
      {"boundary_probe_spacing", boundary_probe_spacing},
  }};
  for (const auto& [name, value] : positive) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ConfigError(std::string("rule parameter '") + name + "' must be finite and > 0");
    }
  }
  if (ped_offroad_c1 < 0.0 || ped_onroad_c1 < 0.0) throw ConfigError("speed gains c1 must be >= 0");
  if (front_half_angle_deg >= side_limit_angle_deg || side_limit_angle_deg > 180.0) {
    throw ConfigError("sector angles must satisfy front_half_angle_deg < side_limit_angle_deg <= 180");
  }
}

namespace {

// Name -> member table shared by the parser and the writer.
const std::vector<std::pair<std::string_view, double RuleParams::*>>& param_fields() {
  static const std::vector<std::pair<std::string_view, double RuleParams::*>> fields{
      {"dt", &RuleParams::dt},
      {"ped_offroad_c0", &RuleParams::ped_offroad_c0},
      {"ped_offroad_c1", &RuleParams::ped_offroad_c1},
      {"ped_onroad_c0", &RuleParams::ped_onroad_c0},
      {"ped_onroad_c1", &RuleParams::ped_onroad_c1},
      {"vehicle_lateral_clearance", &RuleParams::vehicle_lateral_clearance},
      {"vehicle_front_clearance", &RuleParams::vehicle_front_clearance},
      {"intent_horizon", &RuleParams::intent_horizon},
      {"intent_required_decel", &RuleParams::intent_required_decel},
      {"yield_time_gap", &RuleParams::yield_time_gap},
      {"collision_debounce", &RuleParams::collision_debounce},
      {"front_half_angle_deg", &RuleParams::front_half_angle_deg},
      {"side_limit_angle_deg", &RuleParams::side_limit_angle_deg},
      {"opposite_lane_angle_deg", &RuleParams::opposite_lane_angle_deg},
      {"aligned_lane_angle_deg", &RuleParams::aligned_lane_angle_deg},
      {"boundary_probe_spacing", &RuleParams::boundary_probe_spacing},
  };
  return fields;
}

}  // namespace

RuleParams parse_rule_params(std::string_view text, const std::string& source) {
  RuleParams params;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    auto line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ParseError(where + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = parse_double(line.substr(eq + 1), where);
    const auto& fields = param_fields();
    const auto it = std::find_if(fields.begin(), fields.end(), [&](const auto& f) { return f.first == key; });
    if (it == fields.end()) throw ParseError(where + ": unknown rule parameter '" + std::string(key) + "'");
    params.*(it->second) = value;
  }
  params.validate();
  return params;
}

RuleParams load_rule_params(const std::filesystem::path& path) {
  return parse_rule_params(read_file(path), path.string());
}

std::string to_text(const RuleParams& params) {
  std::ostringstream os;
  for (const auto& [name, member] : param_fields()) os << name << " = " << format_double(params.*member) << "\n";
  return os.str();
}

double l2_aggregate(std::span<const double> instantaneous, double dt) {
  double sum = 0.0;
  for (const double g : instantaneous) sum += g * g;
  return std::sqrt(sum * dt);
}

double score_r1_vru_collision(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::vru_collision);
}
double score_r2_vehicle_collision(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::vehicle_collision);
}
double score_r3_drivable_area(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::drivable_area);
}
double score_r4_ped_clearance_offroad(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::ped_clearance_offroad);
}
double score_r5_ped_clearance_onroad(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::ped_clearance_onroad);
}
double score_r6_signal_intent(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::signal_intent);
}
double score_r7_yield(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::yield);
}
double score_r8_correct_side(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::correct_side);
}
double score_r9_parked_car(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::parked_car_clearance);
}
double score_r10_clearance_right(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::clearance_right);
}
double score_r11_clearance_left(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::clearance_left);
}
double score_r12_clearance_front(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::clearance_front);
}
double score_r13_speed_limit(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::speed_limit);
}
double score_r14_stay_in_lane(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  return score_one(w, s, m, p, Rule::stay_in_lane);
}

ViolationVector violation_vector(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p) {
  const Timeline tl = build_timeline(w, s, m, p);
  ViolationVector v;
  for (std::size_t i = 0; i < kRuleCount; ++i) {
    const double score = score_rule(tl, static_cast<Rule>(i));
    v[i] = score > 0.0 ? score : 0.0;
  }
  return v;
}

std::string violations_to_csv(std::span<const std::pair<std::string, ViolationVector>> rows) {
  std::ostringstream os;
  os << "realization_id";
  for (std::size_t i = 0; i < kRuleCount; ++i) os << ",v" << (i + 1);
  os << "\n";
  for (const auto& [id, v] : rows) {
    os << id;
    for (std::size_t i = 0; i < kRuleCount; ++i) os << "," << format_double(v[i]);
    os << "\n";
  }
  return os.str();
}

std::vector<std::pair<std::string, ViolationVector>> violations_from_csv(std::string_view text,
                                                                         const std::string& source) {
  const Table table = parse_table(text, source);
  const int id_col = table.column("realization_id");
  if (id_col < 0) throw ParseError(source + ": missing column realization_id");
  std::array<int, kRuleCount> cols{};
  for (std::size_t i = 0; i < kRuleCount; ++i) {
    cols[i] = table.column("v" + std::to_string(i + 1));
    if (cols[i] < 0) throw ParseError(source + ": missing column v" + std::to_string(i + 1));
  }
  std::vector<std::pair<std::string, ViolationVector>> out;
  for (const auto& row : table.rows) {
    ViolationVector v;
    const std::string where = source + ":" + std::to_string(row.line);
    for (std::size_t i = 0; i < kRuleCount; ++i) {
      v[i] = parse_double(row.fields[static_cast<std::size_t>(cols[i])], where);
      if (!(v[i] >= 0.0) || !std::isfinite(v[i])) throw ParseError(where + ": violation scores must be finite and >= 0");
    }
    out.emplace_back(row.fields[static_cast<std::size_t>(id_col)], v);
  }
  return out;
}

}  // namespace rulebench
