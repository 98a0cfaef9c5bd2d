#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "rulebench/error.hpp"
#include "rulebench/geometry.hpp"
#include "rulebench/model.hpp"
#include "rulebench/scenario_gen.hpp"

namespace rulebench {
namespace {

TEST(Maps, DeterministicAndValid) {
  const auto a = build_maps();
  const auto b = build_maps();
  EXPECT_EQ(a.urban, b.urban);
  EXPECT_EQ(a.suburban, b.suburban);
  EXPECT_EQ(a.urban.id, "map_U");
  EXPECT_EQ(a.suburban.id, "map_S");
  for (const Map* m : {&a.urban, &a.suburban}) {
    EXPECT_NO_THROW(validate(*m));
    for (const auto& lane : m->lanes) {
      for (const auto& p : lane.centerline) EXPECT_TRUE(m->on_drivable_area(p)) << lane.id;
    }
  }
}

TEST(Maps, UrbanHasFourWayIntersectionsSuburbanNone) {
  const auto& urban = slot_types("map_U");
  const auto& suburban = slot_types("map_S");
  ASSERT_EQ(urban.size(), layout::kSlotCount);
  EXPECT_GT(std::count(urban.begin(), urban.end(), SlotType::intersection), 0);
  EXPECT_EQ(std::count(suburban.begin(), suburban.end(), SlotType::intersection), 0);
  const auto maps = build_maps();
  for (std::size_t s = 0; s < urban.size(); ++s) {
    if (urban[s] != SlotType::intersection) continue;
    // Cross street reaches well beyond the arterial on both sides.
    const double x = slot_start_x(s) + layout::kSlotLength / 2;
    EXPECT_TRUE(maps.urban.on_drivable_area({x, 20.0}));
    EXPECT_TRUE(maps.urban.on_drivable_area({x, -20.0}));
    EXPECT_FALSE(maps.suburban.on_drivable_area({x, 20.0}));
  }
}

TEST(Plant, SpeedLimitSeverityWithinTenPercent) {
  const auto r = plant_violation({"r13", 2.0, "map_U", 1});
  EXPECT_GE(r.vector[Rule::speed_limit], 1.8);
  EXPECT_LE(r.vector[Rule::speed_limit], 2.2);
  EXPECT_NO_THROW(validate(r.realization, r.scenario));
  const auto recomputed = violation_vector(r.realization, r.scenario, r.map, {});
  EXPECT_EQ(recomputed, r.vector);
}

TEST(Plant, NoneGivesZeroVector) {
  for (const std::string tmpl : {"map_U", "map_S"}) {
    const auto r = plant_violation({"none", 0.0, tmpl, 3});
    EXPECT_TRUE(r.vector.is_zero()) << tmpl;
  }
}

TEST(Plant, OnlyTargetAndEntangledRulesFire) {
  const auto& ent = entangled_rules();
  for (std::size_t rule = 0; rule < kRuleCount; ++rule) {
    const auto id = rule_id(rule);
    const auto [lo, hi] = feasible_severity(id, "map_U");
    const double target = std::sqrt(lo * hi);
    const auto r = plant_violation({id, target, "map_U", 2});
    EXPECT_NEAR(r.vector[rule], target, 0.1 * target) << id;
    for (std::size_t other = 0; other < kRuleCount; ++other) {
      if (other == rule || r.vector[other] == 0.0) continue;
      const auto it = ent.find(rule);
      const bool allowed = it != ent.end() && std::count(it->second.begin(), it->second.end(), other) > 0;
      EXPECT_TRUE(allowed) << id << " also fired " << rule_id(other);
    }
  }
}

TEST(Plant, FeasibleGridHitsEveryTarget) {
  for (const std::string id : {"r3", "r9", "r13", "r14"}) {
    const auto [lo, hi] = feasible_severity(id, "map_U");
    ASSERT_LT(lo, hi) << id;
    for (int k = 0; k < 5; ++k) {
      const double target = lo + (hi - lo) * k / 4.0;
      const auto r = plant_violation({id, target, "map_U", static_cast<std::uint64_t>(k)});
      EXPECT_NEAR(r.vector[rule_index(id)], target, 0.1 * target) << id << " at " << target;
    }
  }
}

TEST(Plant, Errors) {
  EXPECT_THROW(plant_violation({"r7", 1.0, "map_S", 0}), CapabilityError);
  EXPECT_THROW(plant_violation({"r15", 1.0, "map_U", 0}), LookupError);
  EXPECT_THROW(plant_violation({"r13", 1.0, "map_X", 0}), LookupError);
  const auto [lo, hi] = feasible_severity("r13", "map_U");
  EXPECT_THROW(plant_violation({"r13", hi * 3.0, "map_U", 0}), GenerationError);
  (void)lo;
}

TEST(Plant, RightClearanceMirrorsToLeft) {
  const auto r = plant_violation({"r10", 0.5, "map_U", 4});
  ASSERT_GT(r.vector[Rule::clearance_right], 0.0);
  const double axis = 300.0;
  const auto m = violation_vector(mirror(r.realization, axis), mirror(r.scenario, axis), mirror(r.map, axis), {});
  EXPECT_NEAR(m[Rule::clearance_left], r.vector[Rule::clearance_right], 1e-9);
  EXPECT_NEAR(m[Rule::clearance_right], r.vector[Rule::clearance_left], 1e-9);
}

TEST(Generate, DeterministicAndValid) {
  GenerateConfig cfg;
  cfg.scenarios = 6;
  cfg.realizations_per_scenario = 3;
  cfg.seed = 9;
  const auto a = generate_dataset(cfg);
  const auto b = generate_dataset(cfg);
  EXPECT_EQ(a.dataset, b.dataset);
  EXPECT_EQ(a.manifest_json, b.manifest_json);
  EXPECT_NO_THROW(a.dataset.link_and_validate());
  EXPECT_EQ(a.dataset.scenarios.size(), 6u);
  EXPECT_EQ(a.dataset.realizations.size(), 18u);
  cfg.seed = 10;
  EXPECT_NE(generate_dataset(cfg).dataset, a.dataset);
}

TEST(Generate, DefaultCorpusStatistics) {
  const auto g = generate_dataset({});
  const auto& d = g.dataset;
  EXPECT_EQ(d.realizations.size(), 160u);
  double violated = 0.0;
  std::size_t clean = 0;
  for (const auto& w : d.realizations) {
    const auto& sc = d.scenario(w.scenario_id);
    const auto v = violation_vector(w, sc, d.map(sc.map_id), {});
    violated += static_cast<double>(v.violated_count());
    clean += v.is_zero();
  }
  const double mean = violated / static_cast<double>(d.realizations.size());
  EXPECT_GE(mean, 3.0);
  EXPECT_LE(mean, 5.0);
  EXPECT_GE(clean, 1u);
  EXPECT_LE(clean, 16u);
}

TEST(Generate, RulePoolRestrictsEpisodes) {
  GenerateConfig cfg;
  cfg.scenarios = 5;
  cfg.rule_pool = {12};  // r13 only
  const auto g = generate_dataset(cfg);
  for (const auto& w : g.dataset.realizations) {
    const auto& sc = g.dataset.scenario(w.scenario_id);
    const auto v = violation_vector(w, sc, g.dataset.map(sc.map_id), {});
    for (std::size_t r = 0; r < kRuleCount; ++r) {
      if (r != 12) EXPECT_EQ(v[r], 0.0) << w.id << " " << rule_id(r);
    }
  }
}

}  // namespace
}  // namespace rulebench
