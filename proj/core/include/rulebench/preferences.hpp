#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rulebench/dataset.hpp"
#include "rulebench/violations.hpp"

namespace rulebench {

enum class Choice { a, b };

struct Annotation {
  std::string annotator_id;
  std::string realization_a;
  std::string realization_b;
  Choice choice = Choice::a;
  std::string timestamp;      // optional, free-form
  std::string annotation_id;  // optional, client supplied

  const std::string& winner() const { return choice == Choice::a ? realization_a : realization_b; }
  const std::string& loser() const { return choice == Choice::a ? realization_b : realization_a; }
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// Unordered pair stored with first < second.
struct PairKey {
  std::string first;
  std::string second;

  static PairKey of(std::string_view x, std::string_view y);
  friend auto operator<=>(const PairKey&, const PairKey&) = default;
};

struct PairStats {
  PairKey pair;
  std::size_t n_first = 0;   // votes for pair.first
  std::size_t n_second = 0;  // votes for pair.second
  double agreement = 0.0;
};

// |n1 - n2| / (n1 + n2). Throws DomainError when both are zero.
double agreement(std::size_t n1, std::size_t n2);

inline constexpr std::size_t kAgreementBins = 5;
// [0,0.2], (0.2,0.4], (0.4,0.6], (0.6,0.8], (0.8,1].
std::size_t agreement_bin(double a);
std::string_view agreement_bin_label(std::size_t bin);
std::array<std::size_t, kAgreementBins> bin_agreements(const std::vector<PairStats>& stats);

// One entry per distinct unordered pair, sorted by key.
std::vector<PairStats> pair_stats(const std::vector<Annotation>& annotations);

// Checks a != b, both realizations exist and share a scenario.
void validate_annotations(const std::vector<Annotation>& annotations, const Dataset& dataset);

// Columns: annotator_id, realization_a, realization_b, choice ("a"/"b"),
// optionally timestamp and annotation_id. Extra columns are ignored.
std::vector<Annotation> parse_annotations(std::string_view text, const std::string& source);
std::vector<Annotation> load_annotations(const std::filesystem::path& path);
std::string annotations_to_csv(const std::vector<Annotation>& annotations);

// Import adapter for files with a different native schema: names the source
// columns and the tokens meaning "first shown" / "second shown".
struct AnnotationColumns {
  std::string annotator = "annotator_id";
  std::string first = "realization_a";
  std::string second = "realization_b";
  std::string choice = "choice";
  std::vector<std::string> first_tokens{"a", "A", "0", "left"};
  std::vector<std::string> second_tokens{"b", "B", "1", "right"};
};
std::vector<Annotation> parse_annotations_mapped(std::string_view text, const AnnotationColumns& columns,
                                                 const std::string& source);
// Reads "key = value" lines; list values are comma separated.
AnnotationColumns parse_annotation_columns(std::string_view text, const std::string& source);

struct BTScores {
  std::map<std::string, double> score;  // log-strength
  std::map<std::string, std::size_t> component;
  std::vector<std::size_t> flagged_components;  // clamped at +-20
  std::size_t iterations = 0;
  bool converged = false;

  double at(std::string_view id) const;  // LinkError when unknown
};

struct BTOptions {
  double tolerance = 1e-8;
  std::size_t max_iterations = 10000;
  double clamp = 20.0;
};

// Minorization-maximization fit. Extra `items` without comparisons score 0.
BTScores fit_bradley_terry(const std::vector<PairStats>& stats, const std::vector<std::string>& items = {},
                           const BTOptions& options = {});

struct LabeledPair {
  std::string first;
  std::string second;
  std::string scenario_id;
  int label = 1;  // +1 iff first is preferred
  double agreement = 0.0;
  bool mirrored = false;
  ViolationVector lhs;  // v(first)
  ViolationVector rhs;  // v(second)

  std::array<double, kRuleCount> features() const;  // lhs - rhs
};

struct LabelSet {
  std::vector<LabeledPair> pairs;  // each original followed by its mirror
  std::size_t excluded_ties = 0;
};

// realization id -> (scenario id, violation vector)
struct RealizationInfo {
  std::string scenario_id;
  ViolationVector vector;
};

LabelSet make_labeled_pairs(const std::vector<PairStats>& stats, const BTScores& scores,
                            const std::map<std::string, RealizationInfo>& realizations);

std::string labeled_pairs_to_csv(const std::vector<LabeledPair>& pairs);
std::vector<LabeledPair> parse_labeled_pairs(std::string_view text, const std::string& source);
std::string pair_stats_to_csv(const std::vector<PairStats>& stats);
std::string bt_scores_to_csv(const BTScores& scores);

}  // namespace rulebench
