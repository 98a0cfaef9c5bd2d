#include "rulebench/rulebook.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "rulebench/error.hpp"
#include "rulebench/text_io.hpp"

namespace rulebench {

namespace {

constexpr std::string_view kDefaultRulebook = R"(# Default rulebook "RB". Edges read "lower -> higher".
r1: Avoid collisions with VRUs
r2: Avoid collisions with vehicles
r3: Stay in the drivable area
r4: Maintain clearance with pedestrians off the road
r5: Maintain clearance with pedestrians on the road
r6: Signal intent to maintain clearance with VRU on direct path
r7: Yield to vehicles
r8: Drive on the correct side of the road
r9: Maintain clearance with parked car
r10: Maintain clearance with vehicles on the right
r11: Maintain clearance with vehicles on the left
r12: Maintain clearance with vehicles on the front
r13: Drive under the speed limit
r14: Stay in lane

# Collisions dominate everything; VRU collisions dominate vehicle collisions.
r2 -> r1
r3 -> r2

# unverified: ordering inferred from rule listing
r4 -> r3
r5 -> r3
r6 -> r4
r6 -> r5
# unverified: ordering inferred from rule listing
r7 -> r6
r8 -> r7
r9 -> r8

# r8 outranks right-side clearance.
r10 -> r9
# unverified: ordering inferred from rule listing
r11 -> r9

# r10/r11, r12/r13 and r12/r14 stay incomparable.
# unverified: ordering inferred from rule listing
r12 -> r10
r12 -> r11
r13 -> r10
r13 -> r11
r14 -> r13
)";

// "rK" with K >= 1, else 0.
std::size_t numbered_id(std::string_view id) {
  if (id.size() < 2 || id.front() != 'r') return 0;
  std::size_t k = 0;
  for (const char c : id.substr(1)) {
    if (c < '0' || c > '9') return 0;
    k = k * 10 + static_cast<std::size_t>(c - '0');
    if (k > 100000) return 0;
  }
  return k;
}

}  // namespace

std::string_view to_string(Priority p) {
  switch (p) {
    case Priority::first_higher:
      return "first_higher";
    case Priority::second_higher:
      return "second_higher";
    case Priority::equal:
      return "equal";
    case Priority::incomparable:
      return "incomparable";
  }
  return "?";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::first_preferred:
      return "first_preferred";
    case Outcome::second_preferred:
      return "second_preferred";
    case Outcome::incomparable:
      return "incomparable";
  }
  return "?";
}

Rulebook::Rulebook(std::vector<RuleDecl> rules, std::vector<PriorityEdge> edges)
    : rules_(std::move(rules)), edges_(std::move(edges)) {
  if (rules_.empty()) throw ValidationError("rulebook declares no rules");
  std::set<std::string> seen;
  for (const auto& r : rules_) {
    if (r.id.empty()) throw ValidationError("rule with empty id");
    if (!seen.insert(r.id).second) throw ValidationError("duplicate rule '" + r.id + "'");
  }

  const std::size_t n = rules_.size();
  const bool numbered = std::all_of(rules_.begin(), rules_.end(), [](const RuleDecl& r) { return numbered_id(r.id) > 0; });
  columns_.resize(n);
  std::set<std::size_t> used_columns;
  for (std::size_t i = 0; i < n; ++i) {
    columns_[i] = numbered ? numbered_id(rules_[i].id) - 1 : i;
    used_columns.insert(columns_[i]);
    width_ = std::max(width_, columns_[i] + 1);
  }
  if (used_columns.size() != n) throw ValidationError("rule ids map to the same vector column");

  closure_.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) closure_[i * n + i] = 1;
  std::set<std::pair<std::size_t, std::size_t>> edge_set;
  for (const auto& e : edges_) {
    const auto find = [&](const std::string& id) {
      for (std::size_t i = 0; i < n; ++i) {
        if (rules_[i].id == id) return i;
      }
      throw LinkError("edge '" + e.lower + " -> " + e.higher + "' references undeclared rule '" + id + "'");
    };
    const std::size_t lo = find(e.lower);
    const std::size_t hi = find(e.higher);
    if (lo == hi) throw ValidationError("self edge on rule '" + e.lower + "'");
    if (!edge_set.insert({lo, hi}).second) {
      throw ValidationError("duplicate edge '" + e.lower + " -> " + e.higher + "'");
    }
    closure_[lo * n + hi] = 1;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!closure_[i * n + k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (closure_[k * n + j]) closure_[i * n + j] = 1;
      }
    }
  }
}

std::size_t Rulebook::index(std::string_view id) const {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (rules_[i].id == id) return i;
  }
  throw LookupError("unknown rule '" + std::string(id) + "'");
}

Priority Rulebook::higher_priority(std::string_view a, std::string_view b) const {
  const std::size_t i = index(a);
  const std::size_t j = index(b);
  const bool ij = at_most(i, j);
  const bool ji = at_most(j, i);
  if (ij && ji) return Priority::equal;
  if (ji) return Priority::first_higher;
  if (ij) return Priority::second_higher;
  return Priority::incomparable;
}

void Rulebook::check_width(std::span<const double> v) const {
  if (v.size() < width_) {
    throw ValidationError("violation vector has " + std::to_string(v.size()) + " entries, rulebook needs " +
                          std::to_string(width_));
  }
}

std::vector<std::size_t> Rulebook::maximal_violated(std::span<const double> v) const {
  check_width(v);
  std::vector<std::size_t> violated;
  for (std::size_t i = 0; i < size(); ++i) {
    if (v[columns_[i]] > 0.0) violated.push_back(i);
  }
  std::vector<std::size_t> out;
  for (const std::size_t i : violated) {
    const bool dominated = std::any_of(violated.begin(), violated.end(), [&](std::size_t j) { return strictly_below(i, j); });
    if (!dominated) out.push_back(i);
  }
  return out;
}

Comparison Rulebook::compare(std::span<const double> v1, std::span<const double> v2) const {
  const auto m1 = maximal_violated(v1);
  const auto m2 = maximal_violated(v2);
  Comparison c;
  std::set_union(m1.begin(), m1.end(), m2.begin(), m2.end(), std::back_inserter(c.deciding_rules));
  if (m1.empty() && m2.empty()) return c;

  if (m1.size() == 1 && m2.size() == 1 && m1[0] == m2[0]) {
    const std::size_t col = columns_[m1[0]];
    if (v1[col] < v2[col]) c.outcome = Outcome::first_preferred;
    if (v2[col] < v1[col]) c.outcome = Outcome::second_preferred;
    return c;
  }

  const auto dominated_by = [this](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return std::all_of(a.begin(), a.end(), [&](std::size_t i) {
      return std::any_of(b.begin(), b.end(), [&](std::size_t j) { return strictly_below(i, j); });
    });
  };
  const bool first = dominated_by(m1, m2);
  const bool second = dominated_by(m2, m1);
  if (first && !second) c.outcome = Outcome::first_preferred;
  if (second && !first) c.outcome = Outcome::second_preferred;
  return c;
}

std::string Rulebook::lint_report() const {
  std::ostringstream os;
  const std::size_t n = size();
  os << "rules: " << n << "\nedges: " << edges_.size() << "\n\nclosure (rule: strictly higher rules)\n";
  for (std::size_t i = 0; i < n; ++i) {
    os << "  " << rules_[i].id << ":";
    for (std::size_t j = 0; j < n; ++j) {
      if (strictly_below(i, j)) os << " " << rules_[j].id;
    }
    os << "\n";
  }
  std::vector<std::string> equal;
  std::vector<std::string> incomparable;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::string pair = rules_[i].id + " " + rules_[j].id;
      if (at_most(i, j) && at_most(j, i)) equal.push_back(pair);
      if (!at_most(i, j) && !at_most(j, i)) incomparable.push_back(pair);
    }
  }
  os << "\nequal pairs: " << equal.size() << "\n";
  for (const auto& p : equal) os << "  " << p << "\n";
  os << "\nincomparable pairs: " << incomparable.size() << "\n";
  for (const auto& p : incomparable) os << "  " << p << "\n";
  return os.str();
}

std::string Rulebook::to_text() const {
  std::ostringstream os;
  for (const auto& r : rules_) os << r.id << ": " << r.name << "\n";
  for (const auto& e : edges_) os << e.lower << " -> " << e.higher << "\n";
  return os.str();
}

Rulebook parse_rulebook(std::string_view text, const std::string& source) {
  std::vector<RuleDecl> rules;
  std::vector<PriorityEdge> edges;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    auto line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (const auto arrow = line.find("->"); arrow != std::string_view::npos) {
      const auto lower = trim(line.substr(0, arrow));
      const auto higher = trim(line.substr(arrow + 2));
      if (lower.empty() || higher.empty() || higher.find_first_of(" \t:") != std::string_view::npos ||
          lower.find_first_of(" \t:") != std::string_view::npos) {
        throw ParseError(where + ": malformed edge, expected '<lower> -> <higher>'");
      }
      edges.push_back({std::string(lower), std::string(higher)});
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError(where + ": expected '<id>: <name>' or '<lower> -> <higher>'");
    if (!edges.empty()) throw ParseError(where + ": rule declarations must precede edges");
    const auto id = trim(line.substr(0, colon));
    if (id.empty() || id.find_first_of(" \t") != std::string_view::npos) throw ParseError(where + ": malformed rule id");
    rules.push_back({std::string(id), std::string(trim(line.substr(colon + 1)))});
  }
  try {
    return Rulebook(std::move(rules), std::move(edges));
  } catch (const LinkError& e) {
    throw LinkError(source + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

Rulebook load_rulebook(const std::filesystem::path& path) { return parse_rulebook(read_file(path), path.string()); }

std::string default_rulebook_text() { return std::string(kDefaultRulebook); }

Rulebook default_rulebook() { return parse_rulebook(kDefaultRulebook, "RB"); }

int compare_with_fallback(const Rulebook& rb, const PairClassifier& fallback, std::span<const double> v1,
                          std::span<const double> v2) {
  const Comparison c = rb.compare(v1, v2);
  if (c.outcome == Outcome::first_preferred) return 1;
  if (c.outcome == Outcome::second_preferred) return -1;
  std::vector<double> diff(std::min(v1.size(), v2.size()));
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = v1[i] - v2[i];
  return fallback(diff) >= 0 ? 1 : -1;
}

}  // namespace rulebench
