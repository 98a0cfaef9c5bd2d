#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rulebench/dataset.hpp"
#include "rulebench/preferences.hpp"
#include "rulebench/rulebook.hpp"
#include "rulebench/violations.hpp"

namespace rulebench {

// Road layout shared by both maps: a straight eastbound/westbound arterial
// along y = 0 with two 3.5 m lanes per direction. Ego drives the right
// eastbound lane. The route is cut into fixed-length slots; each slot hosts at
// most one episode.
namespace layout {
inline constexpr double kLaneWidth = 3.5;
inline constexpr double kEgoLaneY = -5.25;
inline constexpr double kBaseSpeed = 8.0;     // m/s
inline constexpr double kSpeedLimit = 12.0;   // m/s
inline constexpr double kSlotLength = 160.0;  // m
inline constexpr double kSlotDuration = kSlotLength / kBaseSpeed;
inline constexpr std::size_t kSlotCount = 8;
inline constexpr double kBayInner = -7.0;
inline constexpr double kBayOuter = -9.5;
inline constexpr double kStep = 0.1;  // s, trajectory sample spacing
}  // namespace layout

enum class SlotType { plain, bay, intersection, terminal };

std::string_view to_string(SlotType t);

struct MapPair {
  Map urban;     // "map_U": grid with four-way intersections
  Map suburban;  // "map_S": loop without intersections
};

// Fixed, deterministic maps.
MapPair build_maps();
const std::vector<SlotType>& slot_types(const std::string& map_id);
double slot_start_x(std::size_t slot);

// Rules that necessarily co-fire with a planted rule.
const std::map<std::size_t, std::vector<std::size_t>>& entangled_rules();

// Slot types able to host an episode for the rule.
std::vector<SlotType> episode_slot_types(std::size_t rule);

// One scheduled episode: which rule it exercises and where.
struct EpisodePlacement {
  std::size_t rule = 0;
  std::size_t slot = 0;
};

// Ego behaviour per episode: nullopt keeps nominal driving, otherwise the
// knob value of that episode.
using EpisodeKnobs = std::vector<std::optional<double>>;

struct ScenarioPlan {
  std::string scenario_id;
  std::string map_id;
  std::size_t first_slot = 0;
  std::size_t last_slot = layout::kSlotCount - 1;
  std::vector<EpisodePlacement> episodes;
};

Scenario build_scenario(const ScenarioPlan& plan);
Realization build_realization(const ScenarioPlan& plan, const std::string& realization_id, const EpisodeKnobs& knobs);

// Knob interval of an episode; severity grows with the knob.
std::pair<double, double> knob_range(std::size_t rule);

struct PlantSpec {
  std::string rule_id;  // "r1".."r14", or "none"
  double severity = 1.0;
  std::string template_id = "map_U";  // map the episode runs on
  std::uint64_t seed = 0;
};

struct PlantResult {
  Map map;
  Scenario scenario;
  Realization realization;
  ViolationVector vector;
  double knob = 0.0;
};

// Severities reachable on a template, [low, high].
std::pair<double, double> feasible_severity(const std::string& rule_id, const std::string& template_id,
                                            const RuleParams& params = {});
// Bisection on the episode knob against the violation metrics; the result is
// within 10% of the target or a GenerationError is thrown.
PlantResult plant_violation(const PlantSpec& spec, const RuleParams& params = {});

struct GenerateConfig {
  std::size_t scenarios = 40;
  std::size_t realizations_per_scenario = 4;
  std::size_t min_episodes = 3;
  std::size_t max_episodes = 7;
  double clean_probability = 0.04;
  double episode_probability = 0.7;
  std::vector<std::size_t> rule_pool;  // episode rules to draw from; empty = all
  std::uint64_t seed = 1;
};

struct GeneratedDataset {
  Dataset dataset;
  std::string manifest_json;
};

GeneratedDataset generate_dataset(const GenerateConfig& config);

enum class NoiseKind { noiseless, uniform_flip, logistic };
enum class TruthKind { utility, rulebook };

struct CrowdSpec {
  std::size_t annotators = 25;
  std::size_t annotations_per_pair = 10;
  NoiseKind noise = NoiseKind::logistic;
  double flip_rate = 0.0;  // uniform_flip
  double beta = 1.0;       // logistic: P(correct) = sigmoid(beta * gap)
  TruthKind truth = TruthKind::utility;
  std::vector<double> utility_weights;  // empty: 2^(14-i) for rule i+1
  std::uint64_t seed = 1;
};

struct PairTruth {
  PairKey pair;
  int label = 1;      // +1 prefers pair.first
  double gap = 0.0;   // >= 0, drives the logistic noise
};

// Ground truth of every within-scenario realization pair.
std::vector<PairTruth> ground_truth(const Dataset& dataset, const std::map<std::string, ViolationVector>& vectors,
                                    const CrowdSpec& crowd, const Rulebook* rulebook);

// Smallest beta whose mean flip probability over `gaps` equals `flip_rate`.
double calibrate_beta(const std::vector<double>& gaps, double flip_rate);

std::vector<Annotation> simulate_crowd(const std::vector<PairTruth>& truth, const CrowdSpec& crowd);

}  // namespace rulebench
