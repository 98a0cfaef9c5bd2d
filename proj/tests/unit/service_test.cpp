#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "fixtures.hpp"
#include "http_server.hpp"
#include "httplib.h"
#include "json.hpp"
#include "rulebench/error.hpp"
#include "rulebench/text_io.hpp"
#include "service.hpp"

namespace rulebench {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Scenario "sc": a pedestrian stands in the ego lane at x = 50. "hit" runs it
// over, "stop" and "crawl" stay short of it. Scenario "sc2" has two clean
// realizations.
Dataset small_dataset() {
  using testing::constant_velocity;
  using testing::make_agent;
  using testing::stationary;
  auto ped = make_agent("ped", AgentKind::pedestrian, stationary(0, 10, 50, -1.75), 0.5, 0.5);
  auto w = testing::make_world(testing::two_lane_road(), {ped}, constant_velocity(0, 10, 0, -1.75, 0, 10), 10);
  Dataset d;
  d.maps.push_back(w.map);
  d.scenarios.push_back(w.scenario);
  Realization hit = w.realization;
  hit.id = "hit";
  Realization stop = hit;
  stop.id = "stop";
  stop.ego.trajectory = stationary(0, 10, 0, -1.75);
  Realization crawl = hit;
  crawl.id = "crawl";
  crawl.ego.trajectory = constant_velocity(0, 10, 0, -1.75, 0, 2);
  d.realizations = {hit, stop, crawl};

  Scenario sc2 = w.scenario;
  sc2.id = "sc2";
  sc2.agents.clear();
  d.scenarios.push_back(sc2);
  Realization p = stop;
  p.id = "p";
  p.scenario_id = "sc2";
  Realization q = crawl;
  q.id = "q";
  q.scenario_id = "sc2";
  d.realizations.push_back(p);
  d.realizations.push_back(q);
  return d;
}

std::string submission(const std::string& id, const std::string& who, const std::string& a, const std::string& b,
                       const std::string& choice) {
  return json{{"annotation_id", id}, {"annotator_id", who}, {"realization_a", a}, {"realization_b", b},
              {"choice", choice}}
      .dump();
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rulebench_service_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    store_ = dir_ / "annotations.csv";
  }
  void TearDown() override { fs::remove_all(dir_); }

  ServiceOptions options() const {
    ServiceOptions o;
    o.store = store_;
    o.seed = 3;
    return o;
  }

  fs::path dir_;
  fs::path store_;
};

TEST_F(ServiceTest, ServesLeastAnnotatedPairsWithinScenarios) {
  AnnotationService svc(small_dataset(), options());
  EXPECT_EQ(svc.pair_count(), 4u);
  std::set<std::string> served;
  for (int i = 0; i < 4; ++i) {
    const auto r = svc.next_pair("u1");
    ASSERT_EQ(r.status, 200);
    const auto j = json::parse(r.body);
    EXPECT_EQ(j["annotations_so_far"], 0);
    const std::string a = j["realization_a"], b = j["realization_b"];
    served.insert(j["pair_id"]);
    ASSERT_EQ(svc.submit(submission("x" + std::to_string(i), "u1", a, b, "a")).status, 201);
  }
  EXPECT_EQ(served.size(), 4u);
  EXPECT_EQ(svc.next_pair("u1").status, 404);
  // A fresh annotator sees pairs that already have one vote each.
  EXPECT_EQ(json::parse(svc.next_pair("u2").body)["annotations_so_far"], 1);
}

TEST_F(ServiceTest, SubmitValidationAndIdempotency) {
  AnnotationService svc(small_dataset(), options());
  EXPECT_EQ(svc.submit("{not json").status, 400);
  EXPECT_EQ(svc.submit(submission("1", "u", "hit", "stop", "c")).status, 400);
  EXPECT_EQ(svc.submit(submission("1", "u", "hit", "hit", "a")).status, 400);
  EXPECT_EQ(svc.submit(submission("1", "u", "hit", "p", "a")).status, 400);
  EXPECT_EQ(svc.submit(submission("1", "u", "hit", "ghost", "a")).status, 400);
  EXPECT_EQ(svc.submit(submission("", "u", "hit", "stop", "a")).status, 400);
  EXPECT_EQ(svc.submit(submission("1", "u,v", "hit", "stop", "a")).status, 400);

  EXPECT_EQ(svc.submit(submission("1", "u", "hit", "stop", "b")).status, 201);
  const auto dup = svc.submit(submission("1", "u", "hit", "stop", "b"));
  EXPECT_EQ(dup.status, 200);
  EXPECT_EQ(json::parse(dup.body)["duplicate"], true);
  const auto conflict = svc.submit(submission("1", "u", "hit", "stop", "a"));
  EXPECT_EQ(conflict.status, 409);
  EXPECT_EQ(json::parse(conflict.body)["error"], "conflict");
  EXPECT_EQ(svc.annotations().size(), 1u);
  EXPECT_EQ(load_annotations(store_).size(), 1u);
}

TEST_F(ServiceTest, StoreReloadsAndRejectsForeignPairs) {
  {
    AnnotationService svc(small_dataset(), options());
    ASSERT_EQ(svc.submit(submission("1", "u", "hit", "stop", "b")).status, 201);
    ASSERT_EQ(svc.submit(submission("2", "v", "stop", "hit", "a")).status, 201);
  }
  AnnotationService again(small_dataset(), options());
  EXPECT_EQ(again.annotations().size(), 2u);
  EXPECT_EQ(again.submit(submission("2", "v", "stop", "hit", "a")).status, 200);
  const auto stats = json::parse(again.stats(false).body);
  EXPECT_EQ(stats["annotations"], 2);
  EXPECT_EQ(stats["pairs"][0]["agreement"], 1.0);

  write_file_atomic(store_, "annotator_id,realization_a,realization_b,choice\nu,hit,p,a\n");
  EXPECT_THROW(AnnotationService(small_dataset(), options()), LinkError);
}

TEST_F(ServiceTest, QualificationGatesStats) {
  AnnotationService svc(small_dataset(), options());
  const auto q = json::parse(svc.qualification().body);
  ASSERT_FALSE(q["pairs"].empty());
  EXPECT_FALSE(q["pairs"][0].contains("better"));
  json good = {{"annotator_id", "good"}, {"answers", json::array()}};
  json bad = {{"annotator_id", "bad"}, {"answers", json::array()}};
  for (const auto& p : q["pairs"]) {
    const std::string a = p["realization_a"], b = p["realization_b"];
    // "hit" is never the better side.
    const bool a_better = a != "hit";
    good["answers"].push_back({{"realization_a", a}, {"realization_b", b}, {"choice", a_better ? "a" : "b"}});
    bad["answers"].push_back({{"realization_a", a}, {"realization_b", b}, {"choice", a_better ? "b" : "a"}});
  }
  const auto g = json::parse(svc.grade_qualification(good.dump()).body);
  EXPECT_EQ(g["passed"], true);
  EXPECT_EQ(g["correct"], g["total"]);
  EXPECT_EQ(json::parse(svc.grade_qualification(bad.dump()).body)["passed"], false);

  ASSERT_EQ(svc.submit(submission("1", "good", "hit", "stop", "b")).status, 201);
  ASSERT_EQ(svc.submit(submission("2", "bad", "hit", "stop", "a")).status, 201);
  EXPECT_EQ(json::parse(svc.stats(false).body)["annotations"], 2);
  EXPECT_EQ(json::parse(svc.stats(true).body)["annotations"], 1);
}

TEST_F(ServiceTest, HttpRoundTrip) {
  AnnotationService svc(small_dataset(), options());
  httplib::Server server;
  install_routes(server, svc);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);

  auto health = client.Get("/api/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);

  auto real = client.Get("/api/realizations/hit");
  ASSERT_TRUE(real);
  EXPECT_EQ(real->status, 200);
  EXPECT_EQ(json::parse(real->body)["realization_id"], "hit");
  EXPECT_EQ(client.Get("/api/realizations/ghost")->status, 404);

  // Scripted session: five annotators make twenty choices, always preferring
  // the realization that sorts first.
  for (int i = 0; i < 20; ++i) {
    const std::string who = "u" + std::to_string(i % 5);
    auto next = client.Get("/api/pairs/next?annotator_id=" + who);
    ASSERT_TRUE(next);
    ASSERT_EQ(next->status, 200);
    const auto j = json::parse(next->body);
    const std::string a = j["realization_a"], b = j["realization_b"];
    const auto body = submission("s" + std::to_string(i), who, a, b, a < b ? "a" : "b");
    auto post = client.Post("/api/annotations", body, "application/json");
    ASSERT_TRUE(post);
    EXPECT_EQ(post->status, 201);
  }
  auto bad = client.Post("/api/annotations", "{}", "application/json");
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body)["error"], "validation_error");

  auto stats = client.Get("/api/stats");
  ASSERT_TRUE(stats);
  const auto s = json::parse(stats->body);
  EXPECT_EQ(s["annotations"], 20);
  EXPECT_EQ(s["pairs_annotated"], 4);
  // Each annotator judges each of the four pairs once.
  for (const auto& p : s["pairs"]) {
    EXPECT_EQ(p["n_first"], 5);
    EXPECT_EQ(p["n_second"], 0);
  }
  auto qual = client.Get("/api/qualification");
  EXPECT_EQ(qual->status, 200);

  server.stop();
  thread.join();

  // The store round-trips into the same per-pair counts.
  const auto stored = pair_stats(load_annotations(store_));
  ASSERT_EQ(stored.size(), 4u);
  for (const auto& p : stored) {
    EXPECT_EQ(p.n_first, 5u);
    EXPECT_DOUBLE_EQ(p.agreement, 1.0);
  }
}

}  // namespace
}  // namespace rulebench
