#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rulebench/model.hpp"

namespace rulebench {

inline constexpr std::size_t kRuleCount = 14;

// Rule ids r1..r14 map to indices 0..13.
enum class Rule : std::size_t {
  vru_collision = 0,        // r1
  vehicle_collision,        // r2
  drivable_area,            // r3
  ped_clearance_offroad,    // r4
  ped_clearance_onroad,     // r5
  signal_intent,            // r6
  yield,                    // r7
  correct_side,             // r8
  parked_car_clearance,     // r9
  clearance_right,          // r10
  clearance_left,           // r11
  clearance_front,          // r12
  speed_limit,              // r13
  stay_in_lane,             // r14
};

constexpr std::size_t index_of(Rule r) { return static_cast<std::size_t>(r); }
std::string rule_id(std::size_t index);         // "r1".."r14"
std::string_view rule_title(std::size_t index);  // human-readable name
// Parses "r1".."r14"; throws LookupError otherwise.
std::size_t rule_index(std::string_view id);

// Nonnegative, finite violation scores; entry i is 0 iff rule i+1 is
// unviolated.
struct ViolationVector {
  std::array<double, kRuleCount> scores{};

  double& operator[](std::size_t i) { return scores[i]; }
  double operator[](std::size_t i) const { return scores[i]; }
  double& operator[](Rule r) { return scores[index_of(r)]; }
  double operator[](Rule r) const { return scores[index_of(r)]; }
  std::span<const double> view() const { return scores; }
  bool is_zero() const;
  std::size_t violated_count() const;

  friend bool operator==(const ViolationVector&, const ViolationVector&) = default;
};

// Thresholds and gains of the violation metrics. Every field is configurable
// through the key-value parameters file.
struct RuleParams {
  double dt = 0.1;  // s, evaluation step

  // r4/r5 clearance threshold: c0 + c1 * ego speed.
  double ped_offroad_c0 = 0.5;  // m
  double ped_offroad_c1 = 0.1;  // s
  double ped_onroad_c0 = 1.0;   // m
  double ped_onroad_c1 = 0.2;   // s

  double vehicle_lateral_clearance = 0.3;  // m, r9..r11
  double vehicle_front_clearance = 1.0;    // m, r12

  double intent_horizon = 3.0;         // s, r6 corridor sweep
  double intent_required_decel = 1.0;  // m/s^2, r6

  double yield_time_gap = 2.0;  // s, r7

  double collision_debounce = 0.3;  // s, overlap gaps shorter than this merge

  // Bearing sectors in ego frame (degrees): front |b| < front_half_angle,
  // sides between front_half_angle and side_limit_angle.
  double front_half_angle_deg = 45.0;
  double side_limit_angle_deg = 135.0;

  // Lanes whose direction differs from ego heading by more than this angle
  // count as opposite-direction (r8); lanes within aligned_lane_angle are
  // candidates for ego's current lane (r14).
  double opposite_lane_angle_deg = 135.0;
  double aligned_lane_angle_deg = 45.0;

  // Spacing of boundary points probed for drivable-area penetration (r3).
  double boundary_probe_spacing = 0.25;  // m

  void validate() const;
  friend bool operator==(const RuleParams&, const RuleParams&) = default;
};

RuleParams parse_rule_params(std::string_view text, const std::string& source = "<params>");
RuleParams load_rule_params(const std::filesystem::path& path);
std::string to_text(const RuleParams& params);

// Per-rule metrics. All share one signature and are pure functions.
double score_r1_vru_collision(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r2_vehicle_collision(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r3_drivable_area(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r4_ped_clearance_offroad(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r5_ped_clearance_onroad(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r6_signal_intent(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r7_yield(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r8_correct_side(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r9_parked_car(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r10_clearance_right(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r11_clearance_left(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r12_clearance_front(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r13_speed_limit(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);
double score_r14_stay_in_lane(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);

ViolationVector violation_vector(const Realization& w, const Scenario& s, const Map& m, const RuleParams& p);

// Time-discretized L2 aggregation: sqrt(sum_k g_k^2 * dt).
double l2_aggregate(std::span<const double> instantaneous, double dt);

// CSV with header "realization_id,v1,...,v14".
std::string violations_to_csv(std::span<const std::pair<std::string, ViolationVector>> rows);
std::vector<std::pair<std::string, ViolationVector>> violations_from_csv(std::string_view text,
                                                                         const std::string& source);

}  // namespace rulebench
