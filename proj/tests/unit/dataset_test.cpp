#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "json.hpp"
#include "rulebench/dataset.hpp"
#include "rulebench/error.hpp"
#include "rulebench/scenario_gen.hpp"
#include "rulebench/text_io.hpp"

namespace rulebench {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("rulebench_dataset_test_" + name);
  fs::remove_all(p);
  return p;
}

Dataset small_dataset() {
  GenerateConfig c;
  c.scenarios = 3;
  c.realizations_per_scenario = 3;
  c.seed = 5;
  return generate_dataset(c).dataset;
}

TEST(Dataset, SaveLoadRoundTrip) {
  const auto ds = small_dataset();
  const auto dir = fresh_dir("roundtrip");
  save_dataset(ds, dir);
  const auto back = load_dataset(dir);
  EXPECT_EQ(back, ds);
  const auto dir2 = fresh_dir("roundtrip2");
  save_dataset(back, dir2);
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    EXPECT_EQ(read_file(entry.path()), read_file(dir2 / fs::relative(entry.path(), dir)));
  }
}

TEST(Dataset, JsonRoundTripPerObject) {
  const auto w = testing::make_world(testing::two_lane_road(), {}, testing::constant_velocity(0, 2, 0, -1.75, 0, 3), 2);
  EXPECT_EQ(map_from_json_string(to_json_string(w.map)), w.map);
  EXPECT_EQ(scenario_from_json_string(to_json_string(w.scenario)), w.scenario);
  EXPECT_EQ(realization_from_json_string(to_json_string(w.realization)), w.realization);
}

TEST(Dataset, DanglingReferenceNamesOffender) {
  auto ds = small_dataset();
  ds.realizations[0].scenario_id = "ghost";
  const auto dir = fresh_dir("dangling");
  save_dataset(ds, dir);
  try {
    load_dataset(dir);
    FAIL() << "expected LinkError";
  } catch (const LinkError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(Dataset, MalformedFileReportsPathAndLine) {
  const auto ds = small_dataset();
  const auto dir = fresh_dir("malformed");
  save_dataset(ds, dir);
  const auto bad = dir / "scenarios" / (ds.scenarios[0].id + ".json");
  std::ofstream(bad) << "{\n \"schema\": \"rulebench.scenario/1\",\n \"id\": oops\n}\n";
  try {
    load_dataset(dir);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(bad.filename().string()), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  }
}

TEST(Dataset, PlaybackPayloadHasMapAndPoses) {
  const auto ds = small_dataset();
  const auto& w = ds.realizations.front();
  const auto j = nlohmann::json::parse(playback_json(ds, w.id));
  EXPECT_EQ(j.at("realization_id"), w.id);
  EXPECT_TRUE(j.contains("map"));
  const auto& sc = ds.scenario(w.scenario_id);
  EXPECT_EQ(j.at("scenario_id"), sc.id);
  EXPECT_DOUBLE_EQ(j.at("duration_s").get<double>(), sc.duration);
  EXPECT_EQ(j.dump().find("\"ego\"") != std::string::npos, true);
  EXPECT_THROW(playback_json(ds, "nope"), LookupError);
}

}  // namespace
}  // namespace rulebench
