#include <gtest/gtest.h>

#include <array>
#include <random>

#include "fixtures.hpp"
#include "rulebench/error.hpp"
#include "rulebench/learners.hpp"
#include "rulebench/rulebook.hpp"
#include "rulebench/violations.hpp"

namespace rulebench {
namespace {

ViolationVector only(std::initializer_list<std::pair<int, double>> entries) {
  ViolationVector v;
  for (const auto& [rule, value] : entries) v[static_cast<std::size_t>(rule - 1)] = value;
  return v;
}

Outcome cmp(const Rulebook& rb, const ViolationVector& a, const ViolationVector& b) {
  return rb.compare(a.view(), b.view()).outcome;
}

Outcome flip(Outcome o) {
  if (o == Outcome::first_preferred) return Outcome::second_preferred;
  if (o == Outcome::second_preferred) return Outcome::first_preferred;
  return o;
}

TEST(HigherPriority, SingleEdge) {
  const auto rb = parse_rulebook("r1: a\nr14: b\nr14 -> r1\n");
  EXPECT_EQ(rb.higher_priority("r1", "r14"), Priority::first_higher);
  EXPECT_EQ(rb.higher_priority("r14", "r1"), Priority::second_higher);
  EXPECT_EQ(rb.higher_priority("r1", "r1"), Priority::equal);
  EXPECT_THROW(rb.higher_priority("r1", "r7"), LookupError);
}

TEST(HigherPriority, CycleIsEqual) {
  const auto rb = parse_rulebook("a: a\nb: b\nc: c\na -> b\nb -> a\nc -> a\n");
  EXPECT_EQ(rb.higher_priority("a", "b"), Priority::equal);
  EXPECT_EQ(rb.higher_priority("b", "c"), Priority::first_higher);
}

TEST(DefaultRulebook, StatedConstraints) {
  const auto rb = default_rulebook();
  EXPECT_EQ(rb.size(), kRuleCount);
  EXPECT_EQ(rb.higher_priority("r10", "r11"), Priority::incomparable);
  EXPECT_EQ(rb.higher_priority("r1", "r2"), Priority::first_higher);
  for (std::size_t i = 2; i < kRuleCount; ++i) {
    EXPECT_EQ(rb.higher_priority("r1", rule_id(i)), Priority::first_higher) << rule_id(i);
    EXPECT_EQ(rb.higher_priority("r2", rule_id(i)), Priority::first_higher) << rule_id(i);
  }
  EXPECT_EQ(rb.higher_priority("r8", "r10"), Priority::first_higher);
  const auto shipped = load_rulebook(std::string(RULEBENCH_DATA_DIR) + "/rulebooks/rb.rules");
  EXPECT_EQ(shipped.to_text(), rb.to_text());
}

TEST(MaximalViolated, Examples) {
  const auto rb = default_rulebook();
  EXPECT_TRUE(rb.maximal_violated(ViolationVector{}.view()).empty());
  EXPECT_EQ(rb.maximal_violated(only({{13, 1}}).view()), (std::vector<std::size_t>{12}));
  EXPECT_EQ(rb.maximal_violated(only({{10, 1}, {11, 2}}).view()), (std::vector<std::size_t>{9, 10}));
  EXPECT_EQ(rb.maximal_violated(only({{10, 1}, {11, 2}, {3, 0.1}}).view()), (std::vector<std::size_t>{2}));
}

TEST(MaximalViolated, MatchesAncestorScan) {
  const auto rb = default_rulebook();
  std::mt19937_64 rng(5);
  std::bernoulli_distribution on(0.3);
  for (int trial = 0; trial < 500; ++trial) {
    ViolationVector v;
    for (auto& x : v.scores) x = on(rng) ? 1.0 : 0.0;
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < kRuleCount; ++i) {
      if (v[i] == 0) continue;
      bool top = true;
      for (std::size_t j = 0; j < kRuleCount; ++j) {
        if (v[j] > 0 && rb.higher_priority(rule_id(j), rule_id(i)) == Priority::first_higher) top = false;
      }
      if (top) expect.push_back(i);
    }
    EXPECT_EQ(rb.maximal_violated(v.view()), expect);
  }
}

TEST(Compare, Examples) {
  const auto rb = default_rulebook();
  EXPECT_EQ(cmp(rb, only({{14, 3}}), only({{1, 0.5}})), Outcome::first_preferred);
  EXPECT_EQ(cmp(rb, only({{1, 2}}), only({{1, 5}})), Outcome::first_preferred);
  EXPECT_EQ(cmp(rb, only({{1, 5}}), only({{1, 5}})), Outcome::incomparable);
  EXPECT_EQ(cmp(rb, only({{10, 1}}), only({{11, 1}})), Outcome::incomparable);
  EXPECT_EQ(cmp(rb, ViolationVector{}, ViolationVector{}), Outcome::incomparable);
  EXPECT_EQ(cmp(rb, ViolationVector{}, only({{14, 0.1}})), Outcome::first_preferred);
  // r13 sits below r10, so only the two clearance rules decide.
  ASSERT_EQ(rb.higher_priority("r10", "r13"), Priority::first_higher);
  const auto c = rb.compare(only({{10, 1}, {13, 1}}).view(), only({{11, 1}}).view());
  EXPECT_EQ(c.outcome, Outcome::incomparable);
  EXPECT_EQ(c.deciding_rules, (std::vector<std::size_t>{9, 10}));
}

TEST(Compare, AntisymmetryAndSubsetOfViolated) {
  const auto rb = default_rulebook();
  std::mt19937_64 rng(8);
  std::bernoulli_distribution on(0.25);
  std::uniform_int_distribution<int> level(1, 3);
  for (int trial = 0; trial < 2000; ++trial) {
    ViolationVector a, b;
    for (std::size_t i = 0; i < kRuleCount; ++i) {
      a[i] = on(rng) ? level(rng) : 0;
      b[i] = on(rng) ? level(rng) : 0;
    }
    const auto ab = rb.compare(a.view(), b.view());
    EXPECT_EQ(rb.compare(b.view(), a.view()).outcome, flip(ab.outcome));
    for (const auto r : ab.deciding_rules) EXPECT_TRUE(a[rb.column(r)] > 0 || b[rb.column(r)] > 0);
  }
}

TEST(Compare, TransitiveOnTotalOrder) {
  std::string text;
  for (int i = 1; i <= 6; ++i) text += "r" + std::to_string(i) + ": x\n";
  for (int i = 1; i < 6; ++i) text += "r" + std::to_string(i + 1) + " -> r" + std::to_string(i) + "\n";
  const auto rb = parse_rulebook(text);
  std::mt19937_64 rng(2);
  std::bernoulli_distribution on(0.4);
  std::uniform_int_distribution<int> level(1, 3);
  auto draw = [&] {
    std::array<double, 6> v{};
    for (auto& x : v) x = on(rng) ? level(rng) : 0;
    return v;
  };
  for (int trial = 0; trial < 3000; ++trial) {
    const auto a = draw(), b = draw(), c = draw();
    if (rb.compare(a, b).outcome == Outcome::first_preferred && rb.compare(b, c).outcome == Outcome::first_preferred) {
      EXPECT_EQ(rb.compare(a, c).outcome, Outcome::first_preferred);
    }
  }
}

TEST(Compare, RaisingLoserSeverityNeverFlips) {
  const auto rb = default_rulebook();
  std::mt19937_64 rng(21);
  std::bernoulli_distribution on(0.25);
  std::uniform_real_distribution<double> sev(0.1, 3);
  for (int trial = 0; trial < 2000; ++trial) {
    ViolationVector a, b;
    for (std::size_t i = 0; i < kRuleCount; ++i) {
      a[i] = on(rng) ? sev(rng) : 0;
      b[i] = on(rng) ? sev(rng) : 0;
    }
    const auto c = rb.compare(a.view(), b.view());
    if (c.outcome != Outcome::first_preferred || c.deciding_rules.size() != 1) continue;
    auto worse = b;
    worse[rb.column(c.deciding_rules[0])] += 1.0;
    EXPECT_EQ(cmp(rb, a, worse), Outcome::first_preferred);
  }
}

TEST(Compare, OracleOnAllPreordersOverThreeRules) {
  const auto orders = testing::all_preorders(3);
  EXPECT_EQ(orders.size(), 29u);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> level(0, 2);
  for (const auto& le : orders) {
    const auto rb = testing::rulebook_from_relation(le);
    for (int k = 0; k < 50; ++k) {
      std::array<double, 3> a{}, b{};
      for (auto& x : a) x = level(rng);
      for (auto& x : b) x = level(rng);
      EXPECT_EQ(rb.compare(a, b).outcome, testing::oracle_compare(le, a, b));
    }
  }
}

TEST(Parse, Errors) {
  EXPECT_THROW(parse_rulebook("r1: a\nr2 -> r1\n"), LinkError);
  EXPECT_THROW(parse_rulebook("r1: a\nr2: b\nr2 -> r1\nr2 -> r1\n"), ValidationError);
  EXPECT_THROW(parse_rulebook("r1: a\nr1: b\n"), ValidationError);
  EXPECT_THROW(parse_rulebook(""), ValidationError);
  EXPECT_THROW(parse_rulebook("r1: a\nwhat is this\n"), ParseError);
}

TEST(Parse, RoundTripAndColumns) {
  const auto rb = parse_rulebook("# subset\nr3: c\nr13: m\nr13 -> r3\n");
  EXPECT_EQ(rb.column(0), 2u);
  EXPECT_EQ(rb.column(1), 12u);
  EXPECT_EQ(rb.required_width(), 13u);
  EXPECT_EQ(parse_rulebook(rb.to_text()).to_text(), rb.to_text());
  const std::vector<double> short_vec(5, 0.0);
  EXPECT_THROW(rb.compare(short_vec, short_vec), ValidationError);
  const auto named = parse_rulebook("speed: s\nlane: l\nlane -> speed\n");
  EXPECT_EQ(named.column(1), 1u);
}

TEST(Lint, ListsIncomparablePairs) {
  const auto text = default_rulebook().lint_report();
  EXPECT_NE(text.find("r10 r11"), std::string::npos);
  EXPECT_NE(text.find("incomparable pairs:"), std::string::npos);
}

TEST(Fallback, ComparableUsesRulebookOtherwiseClassifier) {
  const auto rb = default_rulebook();
  int calls = 0;
  const PairClassifier always_second = [&](std::span<const double>) {
    ++calls;
    return -1;
  };
  EXPECT_EQ(compare_with_fallback(rb, always_second, only({{14, 1}}).view(), only({{1, 1}}).view()), 1);
  EXPECT_EQ(calls, 0);
  EXPECT_EQ(compare_with_fallback(rb, always_second, only({{10, 1}}).view(), only({{11, 1}}).view()), -1);
  EXPECT_EQ(calls, 1);

  // Depth-1 tree trained on the r10 column of v1 - v2.
  Samples s;
  s.dim = kRuleCount;
  for (int k = -3; k <= 3; ++k) {
    if (k == 0) continue;
    std::array<double, kRuleCount> x{};
    x[9] = k;
    s.add(x, k < 0 ? 1 : -1);
  }
  const auto tree = train_tree(s, {1, 0, 0});
  const PairClassifier dt = [&](std::span<const double> d) { return tree.predict(d); };
  EXPECT_EQ(compare_with_fallback(rb, dt, only({{10, 1}}).view(), only({{11, 1}, {10, 3}}).view()), 1);
}

}  // namespace
}  // namespace rulebench
