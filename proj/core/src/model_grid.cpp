#include <set>

#include "json.hpp"
#include "rulebench/error.hpp"
#include "rulebench/learners.hpp"
#include "rulebench/text_io.hpp"

namespace rulebench {

namespace {

constexpr std::string_view kDefaultGrid = R"({
 "LR": {"lambda": [0, 0.001, 0.01, 0.1], "iterations": [200, 1000]},
 "DT": {"max_depth": [1, 2, 3, 4, 5, 6, 7, 8]},
 "RF": {"trees": [50, 200], "max_depth": [2, 4, 8]},
 "LSVM": {"C": [0.01, 0.1, 1, 10]},
 "RBFSVM": {"C": [0.01, 0.1, 1, 10], "gamma": [0.01, 0.1, 1]},
 "NN": {"hidden": [8, 32], "learning_rate": [0.01, 0.001], "epochs": [200], "lambda": [0, 0.001]},
 "BN": {"alpha": [1]}
}
)";

}  // namespace

std::string default_model_grid_text() { return std::string(kDefaultGrid); }

std::vector<ModelGrid> parse_model_grids(std::string_view text, const std::string& source) {
  using json = nlohmann::ordered_json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(source + ": expected an object keyed by model kind");
  std::vector<ModelGrid> grids;
  std::set<ModelKind> seen;
  for (const auto& [kind_name, params] : j.items()) {
    ModelGrid g;
    try {
      g.kind = model_kind_from_string(kind_name);
    } catch (const LookupError& e) {
      throw ConfigError(source + ": " + e.what());
    }
    if (!seen.insert(g.kind).second) throw ConfigError(source + ": duplicate kind '" + kind_name + "'");
    if (!params.is_object()) throw ConfigError(source + ": '" + kind_name + "' must map names to value lists");
    g.points.push_back({});
    for (const auto& [name, values] : params.items()) {
      if (!values.is_array() || values.empty()) {
        throw ConfigError(source + ": " + kind_name + "." + name + " must be a nonempty list");
      }
      std::vector<Hyperparameters> expanded;
      for (const auto& point : g.points) {
        for (const auto& v : values) {
          if (!v.is_number()) throw ConfigError(source + ": " + kind_name + "." + name + " values must be numbers");
          auto p = point;
          p[name] = v.get<double>();
          expanded.push_back(std::move(p));
        }
      }
      g.points = std::move(expanded);
    }
    grids.push_back(std::move(g));
  }
  return grids;
}

std::vector<ModelGrid> load_model_grids(const std::filesystem::path& path) {
  return parse_model_grids(read_file(path), path.string());
}

}  // namespace rulebench
