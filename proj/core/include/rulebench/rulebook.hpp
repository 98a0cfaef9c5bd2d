#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rulebench {

enum class Priority { first_higher, second_higher, equal, incomparable };
enum class Outcome { first_preferred, second_preferred, incomparable };

std::string_view to_string(Priority p);
std::string_view to_string(Outcome o);

struct Comparison {
  Outcome outcome = Outcome::incomparable;
  std::vector<std::size_t> deciding_rules;  // rulebook indices, ascending
};

struct RuleDecl {
  std::string id;
  std::string name;
};

// Directed edge: `lower` has lower priority than `higher`.
struct PriorityEdge {
  std::string lower;
  std::string higher;
};

// A pre-order over rules, given by its generating edges. Immutable after
// construction.
//
// Each rule reads one column of a violation vector. When every id has the form
// "rK" the column is K-1, so a subset rulebook still reads 14-vectors; otherwise
// the column is the declaration index.
class Rulebook {
 public:
  Rulebook(std::vector<RuleDecl> rules, std::vector<PriorityEdge> edges);

  std::size_t size() const { return rules_.size(); }
  const std::vector<RuleDecl>& rules() const { return rules_; }
  const std::vector<PriorityEdge>& edges() const { return edges_; }
  std::size_t index(std::string_view id) const;  // LookupError when unknown
  std::size_t column(std::size_t rule) const { return columns_[rule]; }
  std::size_t required_width() const { return width_; }

  // i <= j in the reflexive-transitive closure.
  bool at_most(std::size_t i, std::size_t j) const { return closure_[i * rules_.size() + j] != 0; }
  bool strictly_below(std::size_t i, std::size_t j) const { return at_most(i, j) && !at_most(j, i); }

  Priority higher_priority(std::string_view a, std::string_view b) const;

  std::vector<std::size_t> maximal_violated(std::span<const double> v) const;
  Comparison compare(std::span<const double> v1, std::span<const double> v2) const;

  // Rules, the closure and every incomparable pair, as text.
  std::string lint_report() const;
  // Round-trips through parse_rulebook.
  std::string to_text() const;

 private:
  void check_width(std::span<const double> v) const;

  std::vector<RuleDecl> rules_;
  std::vector<PriorityEdge> edges_;
  std::vector<std::size_t> columns_;
  std::size_t width_ = 0;
  std::vector<unsigned char> closure_;
};

// Text format: "<id>: <name>" declarations, then "<lower> -> <higher>" edges.
// '#' starts a comment.
Rulebook parse_rulebook(std::string_view text, const std::string& source = "<rulebook>");
Rulebook load_rulebook(const std::filesystem::path& path);

// The shipped 14-rule "RB" configuration.
std::string default_rulebook_text();
Rulebook default_rulebook();

// Rulebook verdict when comparable; otherwise fallback(v1 - v2). Returns +1
// when the first realization is preferred, -1 otherwise.
using PairClassifier = std::function<int(std::span<const double>)>;
int compare_with_fallback(const Rulebook& rb, const PairClassifier& fallback, std::span<const double> v1,
                          std::span<const double> v2);

}  // namespace rulebench
