#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rulebench/error.hpp"
#include "rulebench/preferences.hpp"

namespace rulebench {
namespace {

Annotation vote(const std::string& who, const std::string& a, const std::string& b, Choice c) {
  Annotation x;
  x.annotator_id = who;
  x.realization_a = a;
  x.realization_b = b;
  x.choice = c;
  return x;
}

std::vector<Annotation> votes_for(const std::string& winner, const std::string& loser, int n) {
  std::vector<Annotation> out;
  for (int i = 0; i < n; ++i) {
    // Alternate display order; the winner does not depend on it.
    out.push_back(i % 2 ? vote("u" + std::to_string(i), winner, loser, Choice::a)
                        : vote("u" + std::to_string(i), loser, winner, Choice::b));
  }
  return out;
}

// Plain gradient ascent on the Bradley-Terry log-likelihood, centered.
std::map<std::string, double> ascent_fit(const std::vector<PairStats>& stats) {
  std::map<std::string, double> s;
  for (const auto& p : stats) s[p.pair.first] = s[p.pair.second] = 0.0;
  for (int it = 0; it < 200000; ++it) {
    std::map<std::string, double> g;
    for (const auto& p : stats) {
      const double pf = 1.0 / (1.0 + std::exp(s[p.pair.second] - s[p.pair.first]));
      const double n = static_cast<double>(p.n_first + p.n_second);
      g[p.pair.first] += p.n_first - n * pf;
      g[p.pair.second] -= p.n_first - n * pf;
    }
    for (auto& [k, v] : s) v += 0.05 * g[k];
  }
  return s;
}

TEST(Agreement, Values) {
  EXPECT_DOUBLE_EQ(agreement(10, 4), 6.0 / 14.0);
  EXPECT_DOUBLE_EQ(agreement(4, 10), 6.0 / 14.0);
  EXPECT_DOUBLE_EQ(agreement(7, 7), 0.0);
  EXPECT_DOUBLE_EQ(agreement(34, 0), 1.0);
  EXPECT_THROW(agreement(0, 0), DomainError);
}

TEST(Agreement, Bins) {
  EXPECT_EQ(agreement_bin(0.0), 0u);
  EXPECT_EQ(agreement_bin(0.2), 0u);
  EXPECT_EQ(agreement_bin(std::nextafter(0.2, 1.0)), 1u);
  EXPECT_EQ(agreement_bin(agreement(6, 4)), 0u);
  EXPECT_EQ(agreement_bin(agreement(8, 2)), 2u);
  EXPECT_EQ(agreement_bin(agreement(9, 1)), 3u);
  EXPECT_EQ(agreement_bin(1.0), 4u);
  EXPECT_THROW(agreement_bin(1.5), DomainError);
  EXPECT_EQ(agreement_bin_label(0), "[0,0.2]");
}

TEST(PairStats, CountsAcrossDisplayOrder) {
  auto v = votes_for("x", "y", 10);
  const auto more = votes_for("y", "x", 4);
  v.insert(v.end(), more.begin(), more.end());
  v.push_back(vote("u", "p", "q", Choice::a));
  const auto s = pair_stats(v);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1].pair.first, "x");
  EXPECT_EQ(s[1].n_first, 10u);
  EXPECT_EQ(s[1].n_second, 4u);
  EXPECT_DOUBLE_EQ(s[1].agreement, 6.0 / 14.0);
  const auto bins = bin_agreements(s);
  EXPECT_EQ(bins[2], 1u);
  EXPECT_EQ(bins[4], 1u);
}

TEST(BradleyTerry, TwoItemsLogOdds) {
  auto v = votes_for("x", "y", 10);
  const auto more = votes_for("y", "x", 4);
  v.insert(v.end(), more.begin(), more.end());
  const auto bt = fit_bradley_terry(pair_stats(v));
  EXPECT_TRUE(bt.converged);
  EXPECT_NEAR(bt.at("x") - bt.at("y"), std::log(10.0 / 4.0), 1e-6);
  EXPECT_THROW(bt.at("z"), LinkError);
}

TEST(BradleyTerry, BalancedRoundRobinIsFlat) {
  std::vector<Annotation> v;
  const std::vector<std::string> ids{"a", "b", "c", "d"};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      for (auto& x : votes_for(ids[i], ids[j], 5)) v.push_back(x);
      for (auto& x : votes_for(ids[j], ids[i], 5)) v.push_back(x);
    }
  }
  const auto bt = fit_bradley_terry(pair_stats(v));
  for (const auto& id : ids) EXPECT_NEAR(bt.at(id) - bt.at("a"), 0.0, 1e-8);
}

TEST(BradleyTerry, MatchesLikelihoodAscent) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> wins(1, 9);
  std::vector<Annotation> v;
  const std::vector<std::string> ids{"a", "b", "c", "d", "e"};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const int w = wins(rng);
      for (auto& x : votes_for(ids[i], ids[j], w)) v.push_back(x);
      for (auto& x : votes_for(ids[j], ids[i], 10 - w)) v.push_back(x);
    }
  }
  const auto stats = pair_stats(v);
  const auto bt = fit_bradley_terry(stats);
  const auto ref = ascent_fit(stats);
  for (const auto& id : ids) EXPECT_NEAR(bt.at(id) - bt.at("a"), ref.at(id) - ref.at("a"), 1e-5) << id;

  // Relabeling the items does not change anyone's score.
  std::vector<Annotation> renamed = v;
  for (auto& x : renamed) {
    x.realization_a = "z" + x.realization_a;
    x.realization_b = "z" + x.realization_b;
  }
  const auto bt2 = fit_bradley_terry(pair_stats(renamed));
  for (const auto& id : ids) EXPECT_NEAR(bt2.at("z" + id) - bt2.at("za"), bt.at(id) - bt.at("a"), 1e-7);
}

TEST(BradleyTerry, SeparableComponentIsClampedAndFlagged) {
  auto v = votes_for("x", "y", 10);
  for (auto& x : votes_for("p", "q", 3)) v.push_back(x);
  for (auto& x : votes_for("q", "p", 2)) v.push_back(x);
  const auto bt = fit_bradley_terry(pair_stats(v), {"lonely"});
  EXPECT_EQ(bt.flagged_components.size(), 1u);
  EXPECT_LE(std::abs(bt.at("x")), 20.0 + 1e-9);
  EXPECT_GT(bt.at("x"), bt.at("y"));
  EXPECT_NE(bt.component.at("x"), bt.component.at("p"));
  EXPECT_DOUBLE_EQ(bt.at("lonely"), 0.0);
  EXPECT_NEAR(bt.at("p") - bt.at("q"), std::log(1.5), 1e-6);
}

TEST(LabeledPairs, MirrorsAndTies) {
  std::vector<Annotation> v = votes_for("x", "y", 7);
  for (auto& a : votes_for("y", "x", 3)) v.push_back(a);
  for (auto& a : votes_for("p", "q", 2)) v.push_back(a);
  for (auto& a : votes_for("q", "p", 2)) v.push_back(a);
  const auto stats = pair_stats(v);
  const auto bt = fit_bradley_terry(stats);
  std::map<std::string, RealizationInfo> info;
  ViolationVector vx, vy;
  vx[0] = 1.0;
  vy[13] = 2.0;
  info["x"] = {"s1", vx};
  info["y"] = {"s1", vy};
  info["p"] = {"s2", {}};
  info["q"] = {"s2", {}};
  const auto set = make_labeled_pairs(stats, bt, info);
  EXPECT_EQ(set.excluded_ties, 1u);
  ASSERT_EQ(set.pairs.size(), 2u);
  const auto& p = set.pairs[0];
  const auto& m = set.pairs[1];
  EXPECT_EQ(p.label, 1);
  EXPECT_FALSE(p.mirrored);
  EXPECT_TRUE(m.mirrored);
  EXPECT_EQ(m.label, -1);
  const auto f = p.features();
  const auto g = m.features();
  for (std::size_t i = 0; i < kRuleCount; ++i) EXPECT_DOUBLE_EQ(f[i], -g[i]);
  EXPECT_DOUBLE_EQ(f[0], 1.0);
  EXPECT_DOUBLE_EQ(f[13], -2.0);

  const auto back = parse_labeled_pairs(labeled_pairs_to_csv(set.pairs), "mem");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].first, m.first);
  EXPECT_EQ(back[1].label, m.label);
  EXPECT_TRUE(back[1].mirrored);
  EXPECT_EQ(back[0].lhs, p.lhs);

  info.erase("q");
  EXPECT_THROW(make_labeled_pairs(stats, bt, info), LinkError);
}

TEST(AnnotationCsv, RoundTripAndErrors) {
  auto v = votes_for("x", "y", 3);
  v[0].timestamp = "2024-01-01T00:00:00Z";
  v[0].annotation_id = "id0";
  const auto back = parse_annotations(annotations_to_csv(v), "mem");
  EXPECT_EQ(back, v);
  EXPECT_THROW(parse_annotations("annotator_id,realization_a,realization_b,choice\nu,x,y,c\n", "f.csv"), ParseError);
  EXPECT_THROW(parse_annotations("annotator_id,realization_a,choice\nu,x,a\n", "f.csv"), ParseError);
  const auto extra = parse_annotations("choice,annotator_id,junk,realization_b,realization_a\nb,u,zz,y,x\n", "f.csv");
  ASSERT_EQ(extra.size(), 1u);
  EXPECT_EQ(extra[0].winner(), "y");
}

TEST(AnnotationCsv, MappedAdapter) {
  const auto cols = parse_annotation_columns(
      "annotator = worker\nfirst = left_clip\nsecond = right_clip\nchoice = pick\nfirst_tokens = L\nsecond_tokens = R\n",
      "cols");
  const auto v = parse_annotations_mapped("worker,left_clip,right_clip,pick\nw1,x,y,R\nw2,y,x,L\n", cols, "native");
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].winner(), "y");
  EXPECT_EQ(v[1].winner(), "y");
  EXPECT_THROW(parse_annotations_mapped("worker,left_clip,right_clip,pick\nw1,x,y,maybe\n", cols, "native"), ParseError);
}

}  // namespace
}  // namespace rulebench
