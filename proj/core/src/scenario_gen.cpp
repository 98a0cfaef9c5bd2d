#include "rulebench/scenario_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "json.hpp"
#include "rulebench/error.hpp"
#include "rulebench/rng.hpp"

namespace rulebench {

namespace {

using namespace layout;

constexpr double kRoadStart = -40.0;
constexpr double kRoadEnd = kSlotLength * static_cast<double>(kSlotCount) + 40.0;
constexpr double kHalfRoad = 2.0 * kLaneWidth;
constexpr double kCrossHalf = 7.0;
constexpr double kCrossSouth = -60.0;
constexpr double kCrossNorth = 210.0;
constexpr double kNorthArterialY = 150.0;
constexpr double kLoopTopY = 200.0;

Polygon rect(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

Polyline offset_line(Vec2 a, Vec2 b, double offset) {
  const Vec2 d = b - a;
  const double len = norm(d);
  const Vec2 n{-d.y / len, d.x / len};
  return {a + offset * n, b + offset * n};
}

Lane straight_lane(std::string id, Vec2 from, Vec2 to) {
  Lane lane;
  lane.id = std::move(id);
  lane.centerline = {from, to};
  lane.left_boundary = offset_line(from, to, 0.5 * kLaneWidth);
  lane.right_boundary = offset_line(from, to, -0.5 * kLaneWidth);
  return lane;
}

// Four lanes of a two-way road along the segment a -> b (the axis). Lanes "1"
// are outermost in each direction.
void add_road(Map& m, const std::string& prefix, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double len = norm(d);
  const Vec2 n{-d.y / len, d.x / len};  // left of a -> b
  auto at = [&](Vec2 p, double off) { return p + off * n; };
  m.lanes.push_back(straight_lane(prefix + "_fwd_1", at(a, -1.5 * kLaneWidth), at(b, -1.5 * kLaneWidth)));
  m.lanes.push_back(straight_lane(prefix + "_fwd_2", at(a, -0.5 * kLaneWidth), at(b, -0.5 * kLaneWidth)));
  m.lanes.push_back(straight_lane(prefix + "_rev_1", at(b, 1.5 * kLaneWidth), at(a, 1.5 * kLaneWidth)));
  m.lanes.push_back(straight_lane(prefix + "_rev_2", at(b, 0.5 * kLaneWidth), at(a, 0.5 * kLaneWidth)));
}

void add_bays(Map& m, const std::vector<SlotType>& slots) {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] != SlotType::bay) continue;
    const double x = slot_start_x(i);
    m.drivable_area.push_back(rect(x + 20.0, kBayOuter, x + 140.0, kBayInner));
  }
}

Map build_urban() {
  Map m;
  m.id = "map_U";
  m.drivable_area.push_back(rect(kRoadStart, -kHalfRoad, kRoadEnd, kHalfRoad));
  m.drivable_area.push_back(
      rect(kRoadStart, kNorthArterialY - kHalfRoad, kRoadEnd, kNorthArterialY + kHalfRoad));
  add_road(m, "main", {kRoadStart, 0.0}, {kRoadEnd, 0.0});
  add_road(m, "north", {kRoadStart, kNorthArterialY}, {kRoadEnd, kNorthArterialY});
  const auto& slots = slot_types(m.id);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] != SlotType::intersection) continue;
    const double xc = slot_start_x(i) + 0.5 * kSlotLength;
    m.drivable_area.push_back(rect(xc - kCrossHalf, kCrossSouth, xc + kCrossHalf, kCrossNorth));
    add_road(m, "cross" + std::to_string(i), {xc, kCrossSouth}, {xc, kCrossNorth});
    m.crosswalks.push_back(rect(xc - kCrossHalf - 4.0, -kHalfRoad, xc - kCrossHalf - 1.0, kHalfRoad));
    m.crosswalks.push_back(rect(xc + kCrossHalf + 1.0, -kHalfRoad, xc + kCrossHalf + 4.0, kHalfRoad));
  }
  add_bays(m, slots);
  m.speed_limit_zones.push_back({rect(kRoadStart - 100.0, kCrossSouth - 100.0, kRoadEnd + 100.0, kCrossNorth + 100.0),
                                 kSpeedLimit});
  return m;
}

Map build_suburban() {
  Map m;
  m.id = "map_S";
  const double west = kRoadStart - kHalfRoad;
  const double east = kRoadEnd + kHalfRoad;
  m.drivable_area.push_back(rect(kRoadStart, -kHalfRoad, kRoadEnd, kHalfRoad));
  m.drivable_area.push_back(rect(kRoadStart, kLoopTopY - kHalfRoad, kRoadEnd, kLoopTopY + kHalfRoad));
  m.drivable_area.push_back(rect(west - kHalfRoad, -kHalfRoad, west + kHalfRoad, kLoopTopY + kHalfRoad));
  m.drivable_area.push_back(rect(east - kHalfRoad, -kHalfRoad, east + kHalfRoad, kLoopTopY + kHalfRoad));
  add_road(m, "main", {kRoadStart, 0.0}, {kRoadEnd, 0.0});
  add_road(m, "top", {kRoadEnd, kLoopTopY}, {kRoadStart, kLoopTopY});
  add_road(m, "east", {east, 0.0}, {east, kLoopTopY});
  add_road(m, "west", {west, kLoopTopY}, {west, 0.0});
  add_bays(m, slot_types(m.id));
  m.speed_limit_zones.push_back(
      {rect(west - 100.0, -100.0, east + 100.0, kLoopTopY + 100.0), kSpeedLimit});
  return m;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::string_view to_string(SlotType t) {
  switch (t) {
    case SlotType::plain:
      return "plain";
    case SlotType::bay:
      return "bay";
    case SlotType::intersection:
      return "intersection";
    case SlotType::terminal:
      return "terminal";
  }
  return "?";
}

const std::vector<SlotType>& slot_types(const std::string& map_id) {
  using S = SlotType;
  static const std::vector<SlotType> urban{S::plain, S::bay,          S::intersection, S::plain,
                                           S::bay,   S::intersection, S::plain,        S::terminal};
  static const std::vector<SlotType> suburban{S::plain, S::bay, S::plain, S::bay,
                                              S::plain, S::bay, S::plain, S::terminal};
  if (map_id == "map_U") return urban;
  if (map_id == "map_S") return suburban;
  throw LookupError("unknown template map '" + map_id + "'");
}

double slot_start_x(std::size_t slot) { return kSlotLength * static_cast<double>(slot); }

MapPair build_maps() { return {build_urban(), build_suburban()}; }

GeneratedDataset generate_dataset(const GenerateConfig& config) {
  if (config.scenarios == 0 || config.realizations_per_scenario < 2) {
    throw ConfigError("need at least one scenario and two realizations per scenario");
  }
  if (config.min_episodes == 0 || config.min_episodes > config.max_episodes || config.max_episodes > kSlotCount) {
    throw ConfigError("episode counts must satisfy 1 <= min <= max <= " + std::to_string(kSlotCount));
  }
  if (!(config.clean_probability >= 0.0 && config.clean_probability <= 1.0) ||
      !(config.episode_probability >= 0.0 && config.episode_probability <= 1.0)) {
    throw ConfigError("probabilities must lie in [0, 1]");
  }

  std::vector<bool> pool(kRuleCount, config.rule_pool.empty());
  for (const std::size_t r : config.rule_pool) {
    if (r >= kRuleCount) throw ConfigError("rule pool entry out of range");
    pool[r] = true;
  }

  GeneratedDataset out;
  auto maps = build_maps();
  out.dataset.maps = {maps.suburban, maps.urban};  // id order, as load_dataset reads them

  nlohmann::ordered_json manifest;
  manifest["format"] = "rulebench.manifest/1";
  manifest["seed"] = config.seed;
  manifest["config"] = {{"scenarios", config.scenarios},
                        {"realizations_per_scenario", config.realizations_per_scenario},
                        {"min_episodes", config.min_episodes},
                        {"max_episodes", config.max_episodes},
                        {"clean_probability", config.clean_probability},
                        {"episode_probability", config.episode_probability}};
  manifest["rule_pool"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < kRuleCount; ++r) {
    if (pool[r]) manifest["rule_pool"].push_back(rule_id(r));
  }
  manifest["scenarios"] = nlohmann::ordered_json::array();

  for (std::size_t s = 0; s < config.scenarios; ++s) {
    Rng rng(mix_seed(config.seed, s));
    char sid[16];
    std::snprintf(sid, sizeof sid, "s%03zu", s);
    ScenarioPlan plan;
    plan.scenario_id = sid;
    plan.map_id = rng.bernoulli(0.5) ? "map_U" : "map_S";
    const auto& types = slot_types(plan.map_id);

    std::vector<std::size_t> slots(kSlotCount);
    for (std::size_t i = 0; i < kSlotCount; ++i) slots[i] = i;
    rng.shuffle(slots);
    const std::size_t n = config.min_episodes + rng.index(config.max_episodes - config.min_episodes + 1);
    slots.resize(n);
    std::sort(slots.begin(), slots.end());
    for (const std::size_t slot : slots) {
      std::vector<std::size_t> candidates;
      for (std::size_t r = 0; r < kRuleCount; ++r) {
        if (!pool[r]) continue;
        const auto ok = episode_slot_types(r);
        if (std::find(ok.begin(), ok.end(), types[slot]) != ok.end()) candidates.push_back(r);
      }
      if (candidates.empty()) continue;  // slot type not served by the pool
      plan.episodes.push_back({candidates[rng.index(candidates.size())], slot});
    }
    out.dataset.scenarios.push_back(build_scenario(plan));

    nlohmann::ordered_json js;
    js["id"] = plan.scenario_id;
    js["map_id"] = plan.map_id;
    js["episodes"] = nlohmann::ordered_json::array();
    for (const auto& e : plan.episodes) js["episodes"].push_back({{"rule", rule_id(e.rule)}, {"slot", e.slot}});
    js["realizations"] = nlohmann::ordered_json::array();

    for (std::size_t w = 0; w < config.realizations_per_scenario; ++w) {
      EpisodeKnobs knobs(plan.episodes.size());
      const bool clean = rng.bernoulli(config.clean_probability);
      for (std::size_t e = 0; e < plan.episodes.size(); ++e) {
        const bool active = !clean && rng.bernoulli(config.episode_probability);
        const auto [lo, hi] = knob_range(plan.episodes[e].rule);
        const double knob = rng.uniform(lo, hi);  // drawn regardless to keep streams aligned
        if (active) knobs[e] = knob;
      }
      const std::string wid = plan.scenario_id + "_w" + std::to_string(w);
      out.dataset.realizations.push_back(build_realization(plan, wid, knobs));
      nlohmann::ordered_json jk = nlohmann::ordered_json::array();
      for (const auto& k : knobs) {
        if (k) {
          jk.push_back(*k);
        } else {
          jk.push_back(nullptr);
        }
      }
      js["realizations"].push_back({{"id", wid}, {"knobs", jk}});
    }
    manifest["scenarios"].push_back(std::move(js));
  }
  out.dataset.link_and_validate();
  out.manifest_json = manifest.dump(1) + "\n";
  return out;
}

std::vector<PairTruth> ground_truth(const Dataset& dataset, const std::map<std::string, ViolationVector>& vectors,
                                    const CrowdSpec& crowd, const Rulebook* rulebook) {
  if (crowd.truth == TruthKind::rulebook && rulebook == nullptr) {
    throw ConfigError("rulebook truth requested without a rulebook");
  }
  std::vector<double> weights = crowd.utility_weights;
  if (weights.empty()) {
    for (std::size_t i = 0; i < kRuleCount; ++i) weights.push_back(std::ldexp(1.0, static_cast<int>(kRuleCount - i)));
  }
  if (weights.size() != kRuleCount) throw ConfigError("utility weights need one entry per rule");

  auto vec = [&](const std::string& id) -> const ViolationVector& {
    const auto it = vectors.find(id);
    if (it == vectors.end()) throw LinkError("no violation vector for realization '" + id + "'");
    return it->second;
  };

  std::map<std::string, std::vector<std::string>> by_scenario;
  for (const auto& w : dataset.realizations) by_scenario[w.scenario_id].push_back(w.id);

  std::vector<PairTruth> out;
  for (auto& [sid, ids] : by_scenario) {
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        PairTruth t;
        t.pair = PairKey::of(ids[i], ids[j]);
        const auto& v1 = vec(t.pair.first);
        const auto& v2 = vec(t.pair.second);
        if (crowd.truth == TruthKind::utility) {
          double u = 0.0;
          for (std::size_t r = 0; r < kRuleCount; ++r) u += weights[r] * (v2[r] - v1[r]);
          t.label = u >= 0.0 ? 1 : -1;
          t.gap = std::abs(u);
        } else {
          const auto c = rulebook->compare(v1.view(), v2.view());
          if (c.outcome == Outcome::incomparable) {
            double s1 = 0.0;
            double s2 = 0.0;
            for (std::size_t r = 0; r < kRuleCount; ++r) {
              s1 += v1[r];
              s2 += v2[r];
            }
            t.label = s1 <= s2 ? 1 : -1;
            t.gap = std::abs(s1 - s2);
          } else {
            t.label = c.outcome == Outcome::first_preferred ? 1 : -1;
            for (const std::size_t r : c.deciding_rules) {
              const std::size_t col = rulebook->column(r);
              t.gap = std::max(t.gap, std::abs(v1[col] - v2[col]));
            }
          }
        }
        out.push_back(std::move(t));
      }
    }
  }
  return out;
}

double calibrate_beta(const std::vector<double>& gaps, double flip_rate) {
  if (gaps.empty()) throw DomainError("cannot calibrate noise on an empty pair set");
  if (!(flip_rate > 0.0 && flip_rate < 1.0)) throw DomainError("flip rate must lie in (0, 1)");
  auto mean_flip = [&](double beta) {
    double s = 0.0;
    for (const double g : gaps) s += 1.0 - logistic(beta * g);
    return s / static_cast<double>(gaps.size());
  };
  if (flip_rate >= 0.5) return 0.0;
  const double zero_share =
      static_cast<double>(std::count(gaps.begin(), gaps.end(), 0.0)) / static_cast<double>(gaps.size());
  if (flip_rate <= 0.5 * zero_share) {
    throw DomainError("flip rate unreachable: too many pairs with zero utility gap");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (mean_flip(hi) > flip_rate) {
    hi *= 2.0;
    if (hi > 1e12) throw DomainError("flip rate calibration diverged");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_flip(mid) > flip_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

std::vector<Annotation> simulate_crowd(const std::vector<PairTruth>& truth, const CrowdSpec& crowd) {
  if (crowd.annotators == 0 || crowd.annotations_per_pair == 0 || crowd.annotations_per_pair > crowd.annotators) {
    throw ConfigError("annotations per pair must lie in [1, annotators]");
  }
  if (crowd.noise == NoiseKind::uniform_flip && !(crowd.flip_rate >= 0.0 && crowd.flip_rate <= 1.0)) {
    throw ConfigError("flip rate must lie in [0, 1]");
  }
  if (crowd.noise == NoiseKind::logistic && !(crowd.beta >= 0.0)) throw ConfigError("beta must be >= 0");

  std::vector<std::string> pool;
  for (std::size_t i = 0; i < crowd.annotators; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "ann%02zu", i + 1);
    pool.emplace_back(id);
  }

  std::vector<Annotation> out;
  std::size_t serial = 0;
  for (const auto& t : truth) {
    Rng rng(mix_seed(crowd.seed, hash_string(t.pair.first + "|" + t.pair.second)));
    std::vector<std::size_t> who(pool.size());
    for (std::size_t i = 0; i < who.size(); ++i) who[i] = i;
    for (std::size_t k = 0; k < crowd.annotations_per_pair; ++k) {
      std::swap(who[k], who[k + rng.index(who.size() - k)]);
    }
    std::sort(who.begin(), who.begin() + static_cast<long>(crowd.annotations_per_pair));
    for (std::size_t k = 0; k < crowd.annotations_per_pair; ++k) {
      double p_correct = 1.0;
      if (crowd.noise == NoiseKind::uniform_flip) p_correct = 1.0 - crowd.flip_rate;
      if (crowd.noise == NoiseKind::logistic) p_correct = logistic(crowd.beta * t.gap);
      const bool correct = rng.uniform() < p_correct;
      const bool first_wins = (t.label > 0) == correct;
      const bool swap_order = rng.bernoulli(0.5);
      Annotation a;
      a.annotator_id = pool[who[k]];
      a.realization_a = swap_order ? t.pair.second : t.pair.first;
      a.realization_b = swap_order ? t.pair.first : t.pair.second;
      a.choice = (first_wins != swap_order) ? Choice::a : Choice::b;
      char aid[24];
      std::snprintf(aid, sizeof aid, "sim%06zu", ++serial);
      a.annotation_id = aid;
      out.push_back(std::move(a));
    }
  }
  return out;
}

}  // namespace rulebench
