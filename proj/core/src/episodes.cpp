// Episode catalog. Every episode lives in one slot, keeps ego on its nominal
// schedule at the slot boundaries, and exposes one knob that scales the
// severity of its target rule.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "rulebench/error.hpp"
#include "rulebench/scenario_gen.hpp"

namespace rulebench {

namespace {

using namespace layout;

// Piecewise-linear speed offset over scenario time; constant outside the
// knots. The first knot must have value 0.
struct Profile {
  std::vector<std::pair<double, double>> knots;

  double value(double t) const {
    if (t <= knots.front().first) return knots.front().second;
    if (t >= knots.back().first) return knots.back().second;
    for (std::size_t i = 1; i < knots.size(); ++i) {
      const auto [t1, v1] = knots[i];
      if (t <= t1) {
        const auto [t0, v0] = knots[i - 1];
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
      }
    }
    return knots.back().second;
  }

  // Integral from the first knot to t.
  double integral(double t) const {
    double sum = 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i) {
      const auto [t0, v0] = knots[i - 1];
      const auto [t1, v1] = knots[i];
      if (t <= t0) return sum;
      const double te = std::min(t, t1);
      const double ve = v0 + (v1 - v0) * (te - t0) / (t1 - t0);
      sum += 0.5 * (v0 + ve) * (te - t0);
      if (t <= t1) return sum;
    }
    return sum + knots.back().second * (t - knots.back().first);
  }
};

// Trapezoid of the given area (m) with 1 s ramps, amplitude capped at h.
Profile pulse(double start, double area, double h) {
  constexpr double ramp = 1.0;
  const double sign = area < 0.0 ? -1.0 : 1.0;
  const double a = std::abs(area);
  if (a <= h * ramp) {
    const double amp = a / ramp;
    return {{{start, 0.0}, {start + ramp, sign * amp}, {start + 2.0 * ramp, 0.0}}};
  }
  const double hold = a / h - ramp;
  return {{{start, 0.0}, {start + ramp, sign * h}, {start + ramp + hold, sign * h}, {start + 2.0 * ramp + hold, 0.0}}};
}

// Lateral excursion over ego x: smoothstep ramps, flat hold.
struct Shift {
  double x0 = 0.0;
  double ramp = 25.0;
  double hold = 40.0;
  double delta = 0.0;  // + left

  std::pair<double, double> at(double x) const {
    const double u = x - x0;
    if (u <= 0.0 || u >= 2.0 * ramp + hold) return {0.0, 0.0};
    auto s = [](double z) { return z * z * (3.0 - 2.0 * z); };
    auto ds = [](double z) { return 6.0 * z * (1.0 - z); };
    if (u < ramp) return {delta * s(u / ramp), delta * ds(u / ramp) / ramp};
    if (u <= ramp + hold) return {delta, 0.0};
    const double z = (u - ramp - hold) / ramp;
    return {delta * (1.0 - s(z)), -delta * ds(z) / ramp};
  }
};

struct EgoPlan {
  double x0 = 0.0;
  std::vector<Profile> speed;
  std::vector<Shift> shifts;
};

Trajectory ego_trajectory(const EgoPlan& plan, double duration) {
  const auto n = static_cast<std::size_t>(std::llround(duration / kStep));
  std::vector<TrajectorySample> samples;
  samples.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / 10.0;
    double v = kBaseSpeed;
    double x = plan.x0 + kBaseSpeed * t;
    for (const auto& p : plan.speed) {
      v += p.value(t);
      x += p.integral(t);
    }
    v = std::max(0.0, v);
    double dy = 0.0;
    double slope = 0.0;
    for (const auto& s : plan.shifts) {
      const auto [d, ds] = s.at(x);
      dy += d;
      slope += ds;
    }
    samples.push_back({t, x, kEgoLaneY + dy, std::atan(slope), v * std::sqrt(1.0 + slope * slope)});
  }
  return Trajectory(std::move(samples));
}

Trajectory stationary(double t0, double t1, Vec2 p, double heading = 0.0) {
  return Trajectory({{t0, p.x, p.y, heading, 0.0}, {t1, p.x, p.y, heading, 0.0}});
}

Trajectory moving(double t0, double t1, Vec2 p0, double heading, double speed) {
  const Vec2 p1 = p0 + (speed * (t1 - t0)) * unit_from_heading(heading);
  return Trajectory({{t0, p0.x, p0.y, heading, speed}, {t1, p1.x, p1.y, heading, speed}});
}

Agent make_agent(std::string id, AgentKind kind, Trajectory traj) {
  Agent a;
  a.id = std::move(id);
  a.kind = kind;
  if (kind == AgentKind::pedestrian) a.footprint = {0.5, 0.5};
  a.trajectory = std::move(traj);
  return a;
}

constexpr double kEgoHalfLength = 2.25;
constexpr double kEgoHalfWidth = 1.0;
constexpr double kBrakeStart = 3.0;  // s into the terminal slot
constexpr double kNominalBrake = 1.5;
constexpr double kStopGap = 8.0;  // m between stopped ego and obstacle
constexpr double kStopDistance = kBaseSpeed * kBaseSpeed / (2.0 * kNominalBrake);
constexpr double kContactDistance = kStopDistance + kStopGap;  // from front bumper at brake start

// Positions and times shared by scenario and realization builders.
constexpr double kSideObjectX = 85.0;   // r4, r5, r9
constexpr double kOffroadPedY = -7.9;   // r4
constexpr double kBayPedY = -9.2;       // r5
constexpr double kParkedY = -7.8;       // r9
constexpr double kRightVehicleY = -7.9; // r10
constexpr double kLeftVehicleY = -2.65; // r11
constexpr double kLeadGap = 8.0;        // r12 bumper gap
constexpr double kCrossingPedGap = 20.0;  // r6, ahead of the front bumper
constexpr double kCrossingPedStart = 3.95;
constexpr double kCrossingPedEnd = 6.05;
constexpr double kYieldGap = 2.3;  // r7, nominal gap between ego exit and arrival
constexpr double kZoneHalf = 7.0;

double obstacle_near_edge(double slot_x) {
  return slot_x + kBaseSpeed * kBrakeStart + kEgoHalfLength + kContactDistance;
}

// Nominal time ego's rear leaves the intersection box.
double nominal_zone_exit() { return (0.5 * kSlotLength + kZoneHalf + kEgoHalfLength) / kBaseSpeed; }

struct SlotFrame {
  double t0 = 0.0;  // scenario time at slot start
  double x0 = 0.0;  // world x of the slot start
};

SlotFrame frame_of(const ScenarioPlan& plan, std::size_t slot) {
  return {kSlotDuration * static_cast<double>(slot - plan.first_slot), slot_start_x(slot)};
}

void add_agents(Scenario& sc, const EpisodePlacement& e, const SlotFrame& f) {
  const std::string tag = "e" + std::to_string(e.slot) + "_";
  const double t1 = f.t0 + kSlotDuration;
  switch (static_cast<Rule>(e.rule)) {
    case Rule::vru_collision:
      sc.agents.push_back(make_agent(tag + "ped", AgentKind::pedestrian,
                                     stationary(f.t0 + 1.0, t1, {obstacle_near_edge(f.x0) + 0.25, kEgoLaneY})));
      break;
    case Rule::vehicle_collision:
      sc.agents.push_back(make_agent(tag + "stopped", AgentKind::vehicle,
                                     stationary(f.t0 + 1.0, t1, {obstacle_near_edge(f.x0) + 2.25, kEgoLaneY})));
      break;
    case Rule::ped_clearance_offroad:
      sc.agents.push_back(
          make_agent(tag + "ped", AgentKind::pedestrian, stationary(f.t0, t1, {f.x0 + kSideObjectX, kOffroadPedY})));
      break;
    case Rule::ped_clearance_onroad:
      sc.agents.push_back(
          make_agent(tag + "ped", AgentKind::pedestrian, stationary(f.t0, t1, {f.x0 + kSideObjectX, kBayPedY})));
      break;
    case Rule::signal_intent: {
      const double x = f.x0 + kBaseSpeed * 4.0 + kEgoHalfLength + kCrossingPedGap + 0.25;
      sc.agents.push_back(make_agent(tag + "ped", AgentKind::pedestrian,
                                     stationary(f.t0 + kCrossingPedStart, f.t0 + kCrossingPedEnd, {x, kEgoLaneY})));
      break;
    }
    case Rule::yield: {
      const double xc = f.x0 + 0.5 * kSlotLength;
      const double arrive = nominal_zone_exit() + kYieldGap;  // front reaches y = -7
      const double ts = std::max(0.0, arrive - 5.0);
      const double te = std::min(kSlotDuration, arrive + 5.0);
      const double y0 = -kZoneHalf - kEgoHalfLength - kBaseSpeed * (arrive - ts);
      const std::string id = tag + "crossing";
      sc.agents.push_back(make_agent(id, AgentKind::vehicle,
                                     moving(f.t0 + ts, f.t0 + te, {xc + 0.5 * kLaneWidth, y0},
                                            0.5 * std::numbers::pi, kBaseSpeed)));
      ConflictZone z;
      z.id = tag + "zone";
      z.agent_id = id;
      z.area = {{xc - kZoneHalf, -kZoneHalf}, {xc + kZoneHalf, -kZoneHalf}, {xc + kZoneHalf, kZoneHalf},
                {xc - kZoneHalf, kZoneHalf}};
      sc.conflict_zones.push_back(std::move(z));
      break;
    }
    case Rule::parked_car_clearance:
      sc.agents.push_back(
          make_agent(tag + "parked", AgentKind::parked_vehicle, stationary(f.t0, t1, {f.x0 + kSideObjectX, kParkedY})));
      break;
    case Rule::clearance_right:
      sc.agents.push_back(make_agent(tag + "right", AgentKind::vehicle,
                                     moving(f.t0 + 3.0, f.t0 + 17.0, {f.x0 + 24.0, kRightVehicleY}, 0.0, kBaseSpeed)));
      break;
    case Rule::clearance_left:
      sc.agents.push_back(make_agent(tag + "left", AgentKind::vehicle,
                                     moving(f.t0 + 3.0, f.t0 + 17.0, {f.x0 + 24.0, kLeftVehicleY}, 0.0, kBaseSpeed)));
      break;
    case Rule::clearance_front:
      sc.agents.push_back(make_agent(
          tag + "lead", AgentKind::vehicle,
          moving(f.t0 + 0.5, f.t0 + 19.5, {f.x0 + 4.0 + 2.0 * kEgoHalfLength + kLeadGap, kEgoLaneY}, 0.0, kBaseSpeed)));
      break;
    case Rule::drivable_area:
    case Rule::correct_side:
    case Rule::speed_limit:
    case Rule::stay_in_lane:
      break;
  }
}

void terminal_braking(EgoPlan& ego, const SlotFrame& f, std::optional<double> impact_speed) {
  const double tb = f.t0 + kBrakeStart;
  if (!impact_speed) {
    ego.speed.push_back({{{tb, 0.0}, {tb + kBaseSpeed / kNominalBrake, -kBaseSpeed}}});
    return;
  }
  const double vi = *impact_speed;
  const double b = (kBaseSpeed * kBaseSpeed - vi * vi) / (2.0 * kContactDistance);
  const double u = b < 1e-12 ? kContactDistance / kBaseSpeed : (kBaseSpeed - vi) / b;
  // Gentle braking lasts until the first sample after contact, then a hard stop.
  const double contact = kBrakeStart + u;
  const double tc = std::ceil((contact + 1e-6) * 10.0) / 10.0;
  const double vc = std::max(0.0, kBaseSpeed - b * (tc - kBrakeStart));
  ego.speed.push_back({{{tb, 0.0}, {f.t0 + tc, vc - kBaseSpeed}, {f.t0 + tc + vc / 8.0 + 1e-9, -kBaseSpeed}}});
}

void add_ego(EgoPlan& ego, const EpisodePlacement& e, const SlotFrame& f, std::optional<double> knob) {
  const auto rule = static_cast<Rule>(e.rule);
  if (rule == Rule::vru_collision || rule == Rule::vehicle_collision) {
    terminal_braking(ego, f, knob);
    return;
  }
  if (rule == Rule::signal_intent) {
    const double b = knob ? 1.0 - *knob : kNominalBrake;
    const double t_dec = f.t0 + 3.8;
    const double t_end = f.t0 + kCrossingPedEnd + 0.25;
    const double drop = b * (t_end - t_dec);
    const double t_back = t_end + drop / kNominalBrake;
    if (drop <= 0.0) return;
    Profile dip{{{t_dec, 0.0}, {t_end, -drop}, {t_back, 0.0}}};
    const double deficit = -dip.integral(t_back);
    ego.speed.push_back(std::move(dip));
    ego.speed.push_back(pulse(t_back + 0.2, deficit, 3.0));
    return;
  }
  if (!knob) return;
  const double k = *knob;
  switch (rule) {
    case Rule::drivable_area:
    case Rule::ped_clearance_offroad:
    case Rule::ped_clearance_onroad:
    case Rule::parked_car_clearance:
    case Rule::clearance_right:
      ego.shifts.push_back({f.x0 + 40.0, 25.0, 40.0, -k});
      break;
    case Rule::clearance_left:
    case Rule::stay_in_lane:
      ego.shifts.push_back({f.x0 + 40.0, 25.0, 40.0, k});
      break;
    case Rule::correct_side:
      ego.shifts.push_back({f.x0 + 30.0, 30.0, 40.0, k});
      break;
    case Rule::yield:
      ego.speed.push_back(pulse(f.t0 + 2.5, -kBaseSpeed * k, 5.0));
      ego.speed.push_back(pulse(f.t0 + 13.6, kBaseSpeed * k, 3.9));
      break;
    case Rule::clearance_front:
      ego.speed.push_back(pulse(f.t0 + 3.0, k, 2.5));
      ego.speed.push_back(pulse(f.t0 + 10.5, -k, 2.5));
      break;
    case Rule::speed_limit: {
      const double amp = kSpeedLimit - kBaseSpeed + k;
      ego.speed.push_back(pulse(f.t0 + 3.0, 3.0 * amp, amp));
      ego.speed.push_back(pulse(f.t0 + 10.0, -3.0 * amp, amp));
      break;
    }
    default:
      break;
  }
}

void check_plan(const ScenarioPlan& plan) {
  if (plan.first_slot > plan.last_slot || plan.last_slot >= kSlotCount) {
    throw ConfigError(plan.scenario_id + ": slot range out of bounds");
  }
  const auto& types = slot_types(plan.map_id);
  std::vector<bool> used(kSlotCount, false);
  for (const auto& e : plan.episodes) {
    if (e.rule >= kRuleCount) throw ConfigError(plan.scenario_id + ": episode rule out of range");
    if (e.slot < plan.first_slot || e.slot > plan.last_slot) {
      throw ConfigError(plan.scenario_id + ": episode slot outside the scenario");
    }
    if (used[e.slot]) throw ConfigError(plan.scenario_id + ": two episodes share slot " + std::to_string(e.slot));
    used[e.slot] = true;
    const auto ok = episode_slot_types(e.rule);
    if (std::find(ok.begin(), ok.end(), types[e.slot]) == ok.end()) {
      throw ConfigError(plan.scenario_id + ": " + rule_id(e.rule) + " episode cannot run on a " +
                        std::string(to_string(types[e.slot])) + " slot");
    }
  }
}

double duration_of(const ScenarioPlan& plan) {
  return kSlotDuration * static_cast<double>(plan.last_slot - plan.first_slot + 1);
}

const MapPair& cached_maps() {
  static const MapPair maps = build_maps();
  return maps;
}

const Map& template_map(const std::string& id) {
  const auto& maps = cached_maps();
  if (id == maps.urban.id) return maps.urban;
  if (id == maps.suburban.id) return maps.suburban;
  throw LookupError("unknown template map '" + id + "'");
}

struct Template {
  ScenarioPlan plan;
  Scenario scenario;
  const Map* map = nullptr;
};

Template make_template(std::size_t rule, const std::string& template_id, std::uint64_t seed) {
  const auto& types = slot_types(template_id);
  const auto ok = episode_slot_types(rule);
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (std::find(ok.begin(), ok.end(), types[i]) != ok.end()) slots.push_back(i);
  }
  if (slots.empty()) {
    throw CapabilityError("template '" + template_id + "' has no slot for a " + rule_id(rule) + " episode");
  }
  Template t;
  const std::size_t slot = slots[seed % slots.size()];
  t.plan.scenario_id = "plant_" + rule_id(rule);
  t.plan.map_id = template_id;
  t.plan.first_slot = slot;
  t.plan.last_slot = slot;
  t.plan.episodes.push_back({rule, slot});
  t.scenario = build_scenario(t.plan);
  t.map = &template_map(template_id);
  return t;
}

double severity_at(const Template& t, double knob, const RuleParams& params, ViolationVector* full = nullptr) {
  const Realization w = build_realization(t.plan, t.plan.scenario_id + "_w", {knob});
  const ViolationVector v = violation_vector(w, t.scenario, *t.map, params);
  if (full != nullptr) *full = v;
  return v[t.plan.episodes.front().rule];
}

// Smallest severity each template reliably reaches within 10%. Collision
// severities are sampled one step after contact; r7 gaps are quantized.
double min_feasible(std::size_t rule) {
  switch (static_cast<Rule>(rule)) {
    case Rule::vru_collision:
    case Rule::vehicle_collision:
      return 1.2;
    case Rule::yield:
      return 0.1;
    default:
      return 0.02;
  }
}

}  // namespace

const std::map<std::size_t, std::vector<std::size_t>>& entangled_rules() {
  static const std::map<std::size_t, std::vector<std::size_t>> table{
      {index_of(Rule::vru_collision), {index_of(Rule::ped_clearance_onroad), index_of(Rule::signal_intent)}},
      {index_of(Rule::vehicle_collision), {index_of(Rule::clearance_front)}},
      {index_of(Rule::drivable_area), {index_of(Rule::stay_in_lane)}},
      {index_of(Rule::correct_side), {index_of(Rule::stay_in_lane)}},
  };
  return table;
}

std::vector<SlotType> episode_slot_types(std::size_t rule) {
  using S = SlotType;
  switch (static_cast<Rule>(rule)) {
    case Rule::vru_collision:
    case Rule::vehicle_collision:
      return {S::terminal};
    case Rule::drivable_area:
    case Rule::ped_clearance_offroad:
      return {S::plain};
    case Rule::ped_clearance_onroad:
    case Rule::parked_car_clearance:
    case Rule::clearance_right:
      return {S::bay};
    case Rule::yield:
      return {S::intersection};
    case Rule::correct_side:
    case Rule::clearance_left:
      return {S::plain, S::bay};
    case Rule::signal_intent:
    case Rule::clearance_front:
    case Rule::speed_limit:
    case Rule::stay_in_lane:
      return {S::plain, S::bay, S::intersection};
  }
  throw LookupError("rule index out of range");
}

std::pair<double, double> knob_range(std::size_t rule) {
  switch (static_cast<Rule>(rule)) {
    case Rule::vru_collision:
    case Rule::vehicle_collision:
      return {0.2, 8.0};  // impact speed
    case Rule::drivable_area:
      return {0.8, 2.0};  // right shift
    case Rule::ped_clearance_offroad:
    case Rule::ped_clearance_onroad:
      return {0.1, 0.7};
    case Rule::signal_intent:
      return {0.02, 1.0};  // shortfall of deceleration below 1 m/s^2
    case Rule::yield:
      return {0.3, 2.2};  // delay at the intersection
    case Rule::correct_side:
      return {4.3, 6.25};
    case Rule::parked_car_clearance:
      return {0.26, 0.5};
    case Rule::clearance_right:
      return {0.36, 0.6};
    case Rule::clearance_left:
      return {0.31, 0.55};
    case Rule::clearance_front:
      return {7.02, 7.9};  // distance gained on the lead vehicle
    case Rule::speed_limit:
      return {0.05, 4.0};  // excess over the limit
    case Rule::stay_in_lane:
      return {0.8, 1.7};
  }
  throw LookupError("rule index out of range");
}

Scenario build_scenario(const ScenarioPlan& plan) {
  check_plan(plan);
  Scenario sc;
  sc.id = plan.scenario_id;
  sc.map_id = plan.map_id;
  sc.duration = duration_of(plan);
  for (const auto& e : plan.episodes) add_agents(sc, e, frame_of(plan, e.slot));
  return sc;
}

Realization build_realization(const ScenarioPlan& plan, const std::string& realization_id, const EpisodeKnobs& knobs) {
  check_plan(plan);
  if (knobs.size() != plan.episodes.size()) throw ConfigError(realization_id + ": one knob entry per episode required");
  EgoPlan ego;
  ego.x0 = slot_start_x(plan.first_slot);
  bool terminal_done = false;
  for (std::size_t i = 0; i < plan.episodes.size(); ++i) {
    const auto& e = plan.episodes[i];
    if (knobs[i]) {
      const auto [lo, hi] = knob_range(e.rule);
      if (!(*knobs[i] >= lo && *knobs[i] <= hi)) {
        throw RangeError(realization_id + ": knob for " + rule_id(e.rule) + " outside its range");
      }
    }
    add_ego(ego, e, frame_of(plan, e.slot), knobs[i]);
    if (slot_types(plan.map_id)[e.slot] == SlotType::terminal) terminal_done = true;
  }
  if (!terminal_done && slot_types(plan.map_id)[plan.last_slot] == SlotType::terminal) {
    terminal_braking(ego, frame_of(plan, plan.last_slot), std::nullopt);
  }
  Realization w;
  w.id = realization_id;
  w.scenario_id = plan.scenario_id;
  w.ego.id = "ego";
  w.ego.kind = AgentKind::vehicle;
  w.ego.footprint = {2.0 * kEgoHalfLength, 2.0 * kEgoHalfWidth};
  w.ego.trajectory = ego_trajectory(ego, duration_of(plan));
  return w;
}

std::pair<double, double> feasible_severity(const std::string& rule, const std::string& template_id,
                                            const RuleParams& params) {
  const std::size_t r = rule_index(rule);
  const Template t = make_template(r, template_id, 0);
  const auto [lo, hi] = knob_range(r);
  return {std::max(min_feasible(r), severity_at(t, lo, params)), severity_at(t, hi, params)};
}

PlantResult plant_violation(const PlantSpec& spec, const RuleParams& params) {
  if (spec.rule_id == "none") {
    ScenarioPlan plan;
    plan.scenario_id = "plant_none";
    plan.map_id = spec.template_id;
    plan.first_slot = plan.last_slot = spec.seed % (kSlotCount - 1);
    PlantResult out;
    out.map = template_map(spec.template_id);
    out.scenario = build_scenario(plan);
    out.realization = build_realization(plan, plan.scenario_id + "_w", {});
    out.vector = violation_vector(out.realization, out.scenario, out.map, params);
    if (!out.vector.is_zero()) throw GenerationError("nominal template is not violation-free");
    return out;
  }
  const std::size_t r = rule_index(spec.rule_id);
  if (!(spec.severity > 0.0) || !std::isfinite(spec.severity)) {
    throw RangeError("planted severity must be finite and > 0");
  }
  const Template t = make_template(r, spec.template_id, spec.seed);
  auto [lo, hi] = knob_range(r);
  const double target = spec.severity;
  const double s_hi = severity_at(t, hi, params);
  const double floor = std::max(min_feasible(r), severity_at(t, lo, params));
  // Templates differ by seed only in placement, which moves the endpoints by
  // round-off; allow that much.
  constexpr double kRoundOff = 1e-9;
  if (target < floor * (1.0 - kRoundOff) || target > s_hi * (1.0 + kRoundOff)) {
    throw GenerationError(spec.rule_id + " severity " + std::to_string(target) + " outside feasible range [" +
                          std::to_string(floor) + ", " + std::to_string(s_hi) + "] on " + spec.template_id);
  }
  double best_knob = hi;
  double best_err = std::abs(s_hi - target);
  for (int it = 0; it < 60 && best_err > 1e-9 * target; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = severity_at(t, mid, params);
    if (std::abs(s - target) < best_err) {
      best_err = std::abs(s - target);
      best_knob = mid;
    }
    if (s < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  PlantResult out;
  out.map = *t.map;
  out.scenario = t.scenario;
  out.knob = best_knob;
  out.realization = build_realization(t.plan, t.plan.scenario_id + "_w", {best_knob});
  out.vector = violation_vector(out.realization, out.scenario, out.map, params);
  const double got = out.vector[r];
  if (std::abs(got - target) > 0.1 * target) {
    throw GenerationError(spec.rule_id + ": reached severity " + std::to_string(got) + " for target " +
                          std::to_string(target));
  }
  const auto& ent = entangled_rules();
  const auto it = ent.find(r);
  for (std::size_t i = 0; i < kRuleCount; ++i) {
    if (i == r || out.vector[i] == 0.0) continue;
    const bool allowed = it != ent.end() && std::find(it->second.begin(), it->second.end(), i) != it->second.end();
    if (!allowed) throw GenerationError(spec.rule_id + ": unexpected side violation of " + rule_id(i));
  }
  return out;
}

}  // namespace rulebench
