#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rulebench/model.hpp"

namespace rulebench {

// Cross-linked set of maps, scenarios and realizations. Lookups are by id.
struct Dataset {
  std::vector<Map> maps;
  std::vector<Scenario> scenarios;
  std::vector<Realization> realizations;

  const Map& map(std::string_view id) const;
  const Scenario& scenario(std::string_view id) const;
  const Realization& realization(std::string_view id) const;
  const Realization* find_realization(std::string_view id) const;
  const Scenario* find_scenario(std::string_view id) const;

  // Checks invariants and cross references; throws LinkError / ValidationError.
  void link_and_validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Reads <root>/maps/*.json, <root>/scenarios/*.json, <root>/realizations/*.json
// in file-name order. Malformed files raise ParseError with path and line;
// dangling map/scenario references raise LinkError.
Dataset load_dataset(const std::filesystem::path& root);

// Writes one file per object, named after its id. Output is deterministic.
void save_dataset(const Dataset& dataset, const std::filesystem::path& root);

std::string to_json_string(const Map& map);
std::string to_json_string(const Scenario& scenario);
std::string to_json_string(const Realization& realization);
Map map_from_json_string(std::string_view text, const std::string& source = "<string>");
Scenario scenario_from_json_string(std::string_view text, const std::string& source = "<string>");
Realization realization_from_json_string(std::string_view text, const std::string& source = "<string>");

// Playback payload for the annotation UI: map geometry plus timestamped poses
// of ego and every agent sampled on a fixed step.
std::string playback_json(const Dataset& dataset, std::string_view realization_id, double step = 0.1);

}  // namespace rulebench
