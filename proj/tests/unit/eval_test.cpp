#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "rulebench/error.hpp"
#include "rulebench/eval.hpp"

namespace rulebench {
namespace {

std::vector<std::string> scenario_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
  return ids;
}

// Two pairs per scenario; the label follows r1 first, then r14.
std::vector<LabeledPair> synthetic_pairs(std::size_t scenarios, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 2);
  std::bernoulli_distribution on(0.5);
  std::vector<LabeledPair> out;
  for (std::size_t s = 0; s < scenarios; ++s) {
    for (int k = 0; k < 2; ++k) {
      LabeledPair p;
      p.scenario_id = "s" + std::to_string(s);
      p.first = p.scenario_id + "_a" + std::to_string(k);
      p.second = p.scenario_id + "_b" + std::to_string(k);
      if (on(rng)) p.lhs[0] = u(rng);
      if (on(rng)) p.rhs[0] = u(rng);
      p.lhs[13] = u(rng);
      p.rhs[13] = u(rng);
      const double key = p.lhs[0] != p.rhs[0] ? p.rhs[0] - p.lhs[0] : p.rhs[13] - p.lhs[13];
      p.label = key > 0 ? 1 : -1;
      p.agreement = 0.1 + 0.2 * static_cast<double>((s + k) % 5);
      LabeledPair m = p;
      std::swap(m.first, m.second);
      std::swap(m.lhs, m.rhs);
      m.label = -p.label;
      m.mirrored = true;
      out.push_back(p);
      out.push_back(m);
    }
  }
  return out;
}

Annotation vote(const std::string& who, const std::string& a, const std::string& b, Choice c) {
  Annotation x;
  x.annotator_id = who;
  x.realization_a = a;
  x.realization_b = b;
  x.choice = c;
  return x;
}

TEST(Folds, SizesDisjointAndDeterministic) {
  const auto ids = scenario_ids(92);
  const auto plan = plan_folds(ids, 3, 10, 5, 10);
  ASSERT_EQ(plan.repeats(), 10u);
  for (std::size_t r = 0; r < 10; ++r) {
    std::vector<std::size_t> sizes;
    std::set<std::string> all;
    for (const auto& fold : plan.outer[r]) {
      sizes.push_back(fold.size());
      for (const auto& id : fold) EXPECT_TRUE(all.insert(id).second);
    }
    std::sort(sizes.rbegin(), sizes.rend());
    EXPECT_EQ(sizes, (std::vector<std::size_t>{19, 19, 18, 18, 18}));
    EXPECT_EQ(all.size(), 92u);
    for (std::size_t f = 0; f < 5; ++f) {
      const std::set<std::string> test(plan.outer[r][f].begin(), plan.outer[r][f].end());
      std::size_t inner_total = 0;
      for (const auto& inner : plan.inner[r][f]) {
        inner_total += inner.size();
        for (const auto& id : inner) EXPECT_FALSE(test.count(id));
      }
      EXPECT_EQ(inner_total, 92u - test.size());
      EXPECT_EQ(plan.inner[r][f].size(), 10u);
    }
  }
  EXPECT_NE(plan.outer[0], plan.outer[1]);
  const auto again = plan_folds(ids, 3, 10, 5, 10);
  EXPECT_EQ(again.outer, plan.outer);
  EXPECT_EQ(again.inner, plan.inner);
  EXPECT_NE(plan_folds(ids, 4, 10, 5, 10).outer, plan.outer);
}

TEST(Folds, InnerCountCappedAndTooFewScenarios) {
  const auto plan = plan_folds(scenario_ids(8), 1, 1, 4, 10);
  EXPECT_EQ(plan.inner[0][0].size(), 6u);
  EXPECT_THROW(plan_folds(scenario_ids(3), 1, 1, 5, 10), ValidationError);
}

TEST(Metrics, Accuracy) {
  EXPECT_DOUBLE_EQ(accuracy({1, -1, 1, 1}, {1, 1, 1, -1}), 50.0);
  EXPECT_THROW(accuracy({}, {}), DomainError);
  EXPECT_THROW(accuracy({1}, {1, 1}), DomainError);
}

TEST(Metrics, StratifiedLeavesEmptyBinsOut) {
  const auto s = stratified_accuracy({1, 1, -1, 1}, {1, -1, -1, 1}, {0.1, 0.15, 0.9, 1.0});
  ASSERT_TRUE(s.percent[0].has_value());
  EXPECT_DOUBLE_EQ(*s.percent[0], 50.0);
  EXPECT_FALSE(s.percent[1].has_value());
  EXPECT_FALSE(s.percent[2].has_value());
  EXPECT_DOUBLE_EQ(*s.percent[4], 100.0);
  EXPECT_EQ(s.counts[4], 2u);
}

TEST(Metrics, RandomPredictorNearHalf) {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution coin(0.5);
  std::vector<int> p, y;
  for (int i = 0; i < 20000; ++i) {
    p.push_back(coin(rng) ? 1 : -1);
    y.push_back(coin(rng) ? 1 : -1);
  }
  EXPECT_NEAR(accuracy(p, y), 50.0, 1.5);
}

TEST(Metrics, Pearson) {
  const auto perfect = pearson({1, 2, 3, 4}, {2, 4, 6, 8});
  EXPECT_TRUE(perfect.defined);
  EXPECT_NEAR(perfect.r, 1.0, 1e-12);
  EXPECT_NEAR(pearson({1, 2, 3}, {3, 2, 1}).r, -1.0, 1e-12);
  EXPECT_FALSE(pearson({1, 1, 1}, {1, 2, 3}).defined);
  // Hand value: centered cross sum 4, centered sums of squares 5 each.
  EXPECT_NEAR(pearson({1, 2, 3, 4}, {1, 3, 2, 4}).r, 0.8, 1e-12);
}

TEST(Metrics, SummarizeUsesSampleStd) {
  const auto s = summarize({2, 4, 4, 4, 5, 5, 7, 9});
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_NEAR(s.std, std::sqrt(32.0 / 7.0), 1e-12);
  EXPECT_EQ(summarize({3}).std, 0.0);
}

TEST(LossL, HandCases) {
  PairVerdicts truth, model;
  std::vector<Annotation> ann;
  for (int i = 0; i < 12; ++i) {
    const std::string x = "x" + std::to_string(i), y = "y" + std::to_string(i);
    truth[PairKey::of(x, y)] = 1;  // x preferred
    model[PairKey::of(x, y)] = i < 9 ? 1 : -1;  // model right on 9 of 12
    ann.push_back(vote("perfect", x, y, Choice::a));  // 12 of 12
    ann.push_back(vote("tied", y, x, i < 9 ? Choice::b : Choice::a));  // 9 of 12
    ann.push_back(vote("worse", x, y, i < 6 ? Choice::a : Choice::b));  // 6 of 12
    if (i < 5) ann.push_back(vote("few", x, y, Choice::a));  // below the pair minimum
  }
  const auto l = annotator_loss_L(model, truth, ann);
  ASSERT_TRUE(l.has_value());
  EXPECT_NEAR(*l, 100.0 / 3.0, 1e-12);

  model.clear();
  EXPECT_FALSE(annotator_loss_L(model, truth, ann).has_value());

  const auto dist = annotator_agreement_distribution(ann, truth);
  ASSERT_EQ(dist.per_annotator.size(), 3u);
  EXPECT_EQ(dist.per_annotator[0].first, "perfect");
  EXPECT_DOUBLE_EQ(dist.per_annotator[0].second, 100.0);
  EXPECT_DOUBLE_EQ(*dist.median, 75.0);
  EXPECT_EQ(dist.histogram[9], 1u);
  EXPECT_EQ(dist.histogram[7], 1u);
  EXPECT_EQ(dist.histogram[5], 1u);
}

TEST(Truth, OrientedToPairKey) {
  LabeledPair p;
  p.first = "b";
  p.second = "a";
  p.label = 1;
  const auto t = truth_from_labels({p});
  EXPECT_EQ(t.at(PairKey::of("a", "b")), -1);
}

TEST(NestedCv, SingleGridPointMatchesDirectRetraining) {
  const auto pairs = synthetic_pairs(30, 2);
  std::vector<std::string> ids;
  for (const auto& p : pairs) {
    if (std::find(ids.begin(), ids.end(), p.scenario_id) == ids.end()) ids.push_back(p.scenario_id);
  }
  const auto plan = plan_folds(ids, 7, 2, 5, 4);
  const std::vector<ModelGrid> grids{{ModelKind::LR, {{{"lambda", 0.01}, {"iterations", 300}}}}};
  const auto report = nested_cv(grids, pairs, plan);
  ASSERT_EQ(report.models.size(), 1u);
  const auto& lr = report.models[0];
  ASSERT_EQ(lr.folds.size(), 10u);
  std::vector<double> accs;
  for (const auto& fold : lr.folds) {
    const auto& test_ids = plan.outer[fold.repeat][fold.fold];
    std::vector<LabeledPair> train_pairs, test_pairs;
    for (const auto& p : pairs) {
      const bool in_test = std::find(test_ids.begin(), test_ids.end(), p.scenario_id) != test_ids.end();
      if (!in_test) train_pairs.push_back(p);
      if (in_test && !p.mirrored) test_pairs.push_back(p);
    }
    const auto m = train({ModelKind::LR, {{"lambda", 0.01}, {"iterations", 300}}, 0}, to_samples(train_pairs, true));
    std::vector<int> pred, lab;
    for (const auto& p : test_pairs) {
      const auto f = p.features();
      pred.push_back(predict(m, f));
      lab.push_back(p.label);
    }
    EXPECT_EQ(fold.n_test, test_pairs.size());
    EXPECT_NEAR(fold.accuracy, accuracy(pred, lab), 1e-9);
    accs.push_back(fold.accuracy);
  }
  EXPECT_NEAR(lr.accuracy.mean, summarize(accs).mean, 1e-9);
  EXPECT_FALSE(report_to_text(report).empty());
  EXPECT_NE(report_to_json(report).find("\"LR\""), std::string::npos);
  EXPECT_NE(folds_to_csv(report).find("LR"), std::string::npos);
}

TEST(NestedCv, RulebookAbstainsOnIncomparable) {
  auto pairs = synthetic_pairs(20, 5);
  std::vector<std::string> ids;
  for (const auto& p : pairs) {
    if (std::find(ids.begin(), ids.end(), p.scenario_id) == ids.end()) ids.push_back(p.scenario_id);
  }
  const auto rb = parse_rulebook("r1: a\nr14: b\nr14 -> r1\n");
  const auto plan = plan_folds(ids, 1, 1, 5, 3);
  EvalOptions opts;
  opts.rulebook = &rb;
  const auto report = nested_cv({{ModelKind::DT, {{{"max_depth", 2}}}}}, pairs, plan, opts);
  const ModelReport* rbm = nullptr;
  const ModelReport* fallback = nullptr;
  for (const auto& m : report.models) {
    if (m.name == "RB") rbm = &m;
    if (m.name == "RB+DT") fallback = &m;
  }
  ASSERT_NE(rbm, nullptr);
  ASSERT_NE(fallback, nullptr);
  // Labels follow this exact lexicographic order, so RB is right whenever it
  // speaks, and every synthetic pair is comparable.
  EXPECT_DOUBLE_EQ(rbm->accuracy.mean, 100.0);
  ASSERT_TRUE(rbm->coverage.has_value());
  EXPECT_DOUBLE_EQ(rbm->coverage->mean, 100.0);
  for (const auto& f : fallback->folds) EXPECT_EQ(f.n_predicted, f.n_test);
}

TEST(Samples, MirroredOptional) {
  const auto pairs = synthetic_pairs(3, 1);
  EXPECT_EQ(to_samples(pairs, true).size(), pairs.size());
  EXPECT_EQ(to_samples(pairs, false).size(), pairs.size() / 2);
}

}  // namespace
}  // namespace rulebench
