#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rulebench/learners.hpp"
#include "rulebench/preferences.hpp"
#include "rulebench/rulebook.hpp"

namespace rulebench {

struct FoldPlan {
  std::uint64_t seed = 0;
  // outer[r][f]: scenario ids of outer fold f in repeat r.
  std::vector<std::vector<std::vector<std::string>>> outer;
  // inner[r][f][k]: scenario ids of inner fold k within the training part of
  // outer fold f.
  std::vector<std::vector<std::vector<std::vector<std::string>>>> inner;

  std::size_t repeats() const { return outer.size(); }
};

// Deterministic per-repeat shuffle; fold sizes differ by at most one. Inner
// fold count is capped by the number of training scenarios.
FoldPlan plan_folds(std::vector<std::string> scenario_ids, std::uint64_t seed, std::size_t repeats = 10,
                    std::size_t outer_folds = 5, std::size_t inner_folds = 10);

// Percent correct; throws DomainError on empty or mismatched input.
double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

struct StratifiedAccuracy {
  std::array<std::optional<double>, kAgreementBins> percent;  // empty bins absent
  std::array<std::size_t, kAgreementBins> counts{};
};

StratifiedAccuracy stratified_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels,
                                       const std::vector<double>& agreements);

struct Correlation {
  double r = 0.0;
  bool defined = false;  // false when either side has zero variance
};

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y);

// Ground-truth label and model prediction of each unordered pair, oriented so
// that +1 prefers PairKey::first.
using PairVerdicts = std::map<PairKey, int>;

inline constexpr std::size_t kMinAnnotatorPairs = 10;

// Share (%) of qualifying annotators whose agreement with ground truth on their
// own annotations strictly exceeds the model's on the same annotations. Only
// pairs present in both maps count. nullopt when nobody qualifies.
std::optional<double> annotator_loss_L(const PairVerdicts& model, const PairVerdicts& truth,
                                       const std::vector<Annotation>& annotations);

struct AgreementDistribution {
  std::vector<std::pair<std::string, double>> per_annotator;  // percent, sorted by id
  std::array<std::size_t, 10> histogram{};                     // 10-point bins, last closed
  std::optional<double> median;
};

AgreementDistribution annotator_agreement_distribution(const std::vector<Annotation>& annotations,
                                                       const PairVerdicts& truth);

PairVerdicts truth_from_labels(const std::vector<LabeledPair>& pairs);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
  std::size_t n = 0;
};

Summary summarize(const std::vector<double>& values);

struct FoldResult {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  Hyperparameters chosen;
  std::size_t n_test = 0;
  std::size_t n_predicted = 0;  // RB abstains on incomparable pairs
  double accuracy = 0.0;
  StratifiedAccuracy stratified;
  std::optional<double> loss_L;
  Correlation correlation;
};

struct ModelReport {
  std::string name;
  std::vector<FoldResult> folds;
  Summary accuracy;
  std::array<std::optional<Summary>, kAgreementBins> stratified;
  std::optional<Summary> loss_L;
  std::optional<Summary> correlation;
  std::optional<Summary> coverage;  // RB only, percent of comparable pairs
};

struct MetricsReport {
  std::vector<ModelReport> models;
  std::vector<std::string> warnings;
  std::size_t repeats = 0;
  std::size_t outer_folds = 0;
};

struct EvalOptions {
  const Rulebook* rulebook = nullptr;  // adds "RB" and "RB+DT"
  const std::vector<Annotation>* annotations = nullptr;  // enables L
  std::vector<std::size_t> fallback_depths{1, 2, 3, 4};
};

// Repeated nested cross-validation. Training uses pairs and their mirrors;
// testing counts each unordered pair once.
MetricsReport nested_cv(const std::vector<ModelGrid>& grids, const std::vector<LabeledPair>& pairs,
                        const FoldPlan& plan, const EvalOptions& options = {});

std::string report_to_text(const MetricsReport& report);
std::string report_to_json(const MetricsReport& report);
std::string folds_to_csv(const MetricsReport& report);

Samples to_samples(const std::vector<LabeledPair>& pairs, bool include_mirrored);

}  // namespace rulebench
