#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rulebench/dataset.hpp"
#include "rulebench/preferences.hpp"
#include "rulebench/rng.hpp"
#include "rulebench/violations.hpp"

namespace rulebench {

// HTTP-independent response: status code plus JSON body.
struct Response {
  int status = 200;
  std::string body;
};

struct ServiceOptions {
  std::filesystem::path store;  // append-only annotations file (CSV)
  std::uint64_t seed = 1;
  RuleParams params;
  std::size_t qualification_pairs = 5;
  double qualification_pass = 0.8;  // share of easy pairs answered correctly
};

// State behind the annotation UI. Thread-safe; every mutation goes through one
// mutex and the store file is appended by one writer.
class AnnotationService {
 public:
  AnnotationService(Dataset dataset, ServiceOptions options);

  // Least-annotated within-scenario pair, chosen uniformly among ties. Pairs
  // the annotator already judged are skipped when an id is given. Display
  // order is randomized per serving.
  Response next_pair(const std::string& annotator_id);
  Response realization(const std::string& id) const;
  // Body: {"annotation_id", "annotator_id", "realization_a", "realization_b",
  // "choice": "a"|"b", optional "timestamp"}. Repeating an id with the same
  // content is a no-op.
  Response submit(const std::string& json_body);
  // Per-pair counts and agreement; qualified_only restricts to annotators who
  // passed the qualification test.
  Response stats(bool qualified_only) const;
  Response qualification() const;
  // Body: {"annotator_id", "answers": [{"realization_a", "realization_b", "choice"}]}.
  Response grade_qualification(const std::string& json_body);

  std::size_t pair_count() const { return pairs_.size(); }
  std::vector<Annotation> annotations() const;

 private:
  struct Easy {
    PairKey pair;
    std::string better;
  };

  Dataset dataset_;
  ServiceOptions options_;
  std::vector<PairKey> pairs_;
  std::map<PairKey, std::string> pair_scenario_;
  std::vector<Easy> easy_;

  mutable std::mutex mu_;
  Rng rng_;
  std::vector<Annotation> stored_;
  std::map<std::string, std::size_t> by_id_;  // annotation_id -> index in stored_
  std::map<PairKey, std::size_t> counts_;
  std::map<std::string, std::set<PairKey>> seen_;  // annotator -> pairs
  std::set<std::string> qualified_;
};

}  // namespace rulebench
