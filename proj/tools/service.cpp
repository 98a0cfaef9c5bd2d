#include "service.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "rulebench/error.hpp"
#include "rulebench/text_io.hpp"

namespace rulebench {

namespace {

using json = nlohmann::ordered_json;

Response error_response(int status, std::string_view kind, const std::string& message) {
  return {status, json{{"error", kind}, {"message", message}}.dump()};
}

bool safe_field(const std::string& s) {
  return s.find_first_of(",\n\r\"") == std::string::npos;
}

std::string pair_id(const PairKey& k) { return k.first + "|" + k.second; }

}  // namespace

AnnotationService::AnnotationService(Dataset dataset, ServiceOptions options)
    : dataset_(std::move(dataset)), options_(std::move(options)), rng_(options_.seed) {
  dataset_.link_and_validate();
  std::map<std::string, std::vector<std::string>> by_scenario;
  for (const auto& w : dataset_.realizations) by_scenario[w.scenario_id].push_back(w.id);
  for (auto& [sid, ids] : by_scenario) {
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        const auto key = PairKey::of(ids[i], ids[j]);
        pairs_.push_back(key);
        pair_scenario_[key] = sid;
      }
    }
  }
  std::sort(pairs_.begin(), pairs_.end());
  for (const auto& p : pairs_) counts_[p] = 0;

  // Easy pairs: one side collides with something, the other side is clean.
  std::map<std::string, ViolationVector> vectors;
  for (const auto& w : dataset_.realizations) {
    const auto& sc = dataset_.scenario(w.scenario_id);
    vectors[w.id] = violation_vector(w, sc, dataset_.map(sc.map_id), options_.params);
  }
  for (const auto& p : pairs_) {
    const auto& v1 = vectors[p.first];
    const auto& v2 = vectors[p.second];
    auto collides = [](const ViolationVector& v) { return v[Rule::vru_collision] > 0.0 || v[Rule::vehicle_collision] > 0.0; };
    if (collides(v1) && v2.is_zero()) easy_.push_back({p, p.second});
    if (collides(v2) && v1.is_zero()) easy_.push_back({p, p.first});
    if (easy_.size() == options_.qualification_pairs) break;
  }

  if (!options_.store.empty() && std::filesystem::exists(options_.store)) {
    const auto text = read_file(options_.store);
    if (!trim(text).empty()) {
      for (auto& a : parse_annotations(text, options_.store.string())) {
        const auto key = PairKey::of(a.realization_a, a.realization_b);
        if (!counts_.count(key)) throw LinkError(options_.store.string() + ": unknown pair " + pair_id(key));
        if (!a.annotation_id.empty()) by_id_[a.annotation_id] = stored_.size();
        ++counts_[key];
        seen_[a.annotator_id].insert(key);
        stored_.push_back(std::move(a));
      }
    }
  }
}

Response AnnotationService::next_pair(const std::string& annotator_id) {
  std::lock_guard lock(mu_);
  if (pairs_.empty()) return error_response(404, "lookup_error", "dataset has no within-scenario pairs");
  const auto seen_it = seen_.find(annotator_id);
  std::vector<const PairKey*> best;
  std::size_t best_count = 0;
  for (const auto& p : pairs_) {
    if (!annotator_id.empty() && seen_it != seen_.end() && seen_it->second.count(p)) continue;
    const std::size_t c = counts_.at(p);
    if (best.empty() || c < best_count) {
      best.clear();
      best_count = c;
    }
    if (c == best_count) best.push_back(&p);
  }
  if (best.empty()) return error_response(404, "lookup_error", "annotator '" + annotator_id + "' has judged every pair");
  const PairKey& p = *best[rng_.index(best.size())];
  const bool swap = rng_.bernoulli(0.5);
  const auto& a = swap ? p.second : p.first;
  const auto& b = swap ? p.first : p.second;
  const auto& sc = dataset_.scenario(pair_scenario_.at(p));
  return {200, json{{"pair_id", pair_id(p)},
                    {"scenario_id", sc.id},
                    {"duration_s", sc.duration},
                    {"realization_a", a},
                    {"realization_b", b},
                    {"annotations_so_far", best_count}}
                   .dump()};
}

Response AnnotationService::realization(const std::string& id) const {
  if (dataset_.find_realization(id) == nullptr) return error_response(404, "lookup_error", "unknown realization '" + id + "'");
  return {200, playback_json(dataset_, id)};
}

Response AnnotationService::submit(const std::string& json_body) {
  json j;
  try {
    j = json::parse(json_body);
  } catch (const json::parse_error& e) {
    return error_response(400, "parse_error", e.what());
  }
  Annotation a;
  try {
    a.annotation_id = j.at("annotation_id").get<std::string>();
    a.annotator_id = j.at("annotator_id").get<std::string>();
    a.realization_a = j.at("realization_a").get<std::string>();
    a.realization_b = j.at("realization_b").get<std::string>();
    const auto choice = j.at("choice").get<std::string>();
    if (choice != "a" && choice != "b") return error_response(400, "validation_error", "choice must be \"a\" or \"b\"");
    a.choice = choice == "a" ? Choice::a : Choice::b;
    if (j.contains("timestamp")) a.timestamp = j.at("timestamp").get<std::string>();
  } catch (const json::exception& e) {
    return error_response(400, "validation_error", e.what());
  }
  for (const auto* f : {&a.annotation_id, &a.annotator_id, &a.realization_a, &a.realization_b, &a.timestamp}) {
    if (!safe_field(*f)) return error_response(400, "validation_error", "fields must not contain commas, quotes or newlines");
  }
  if (a.annotation_id.empty() || a.annotator_id.empty()) {
    return error_response(400, "validation_error", "annotation_id and annotator_id are required");
  }
  if (a.realization_a == a.realization_b) return error_response(400, "validation_error", "a pair needs two realizations");
  const auto key = PairKey::of(a.realization_a, a.realization_b);
  if (!pair_scenario_.count(key)) {
    return error_response(400, "validation_error", "realizations unknown or from different scenarios");
  }

  std::lock_guard lock(mu_);
  if (const auto it = by_id_.find(a.annotation_id); it != by_id_.end()) {
    if (stored_[it->second] == a) return {200, json{{"stored", false}, {"duplicate", true}}.dump()};
    return error_response(409, "conflict", "annotation id '" + a.annotation_id + "' already holds a different record");
  }
  if (!options_.store.empty()) {
    const bool fresh = !std::filesystem::exists(options_.store) || std::filesystem::file_size(options_.store) == 0;
    std::ofstream out(options_.store, std::ios::app | std::ios::binary);
    if (!out) return error_response(500, "io_error", "cannot open annotation store");
    const std::string csv = annotations_to_csv({a});
    out << (fresh ? csv : csv.substr(csv.find('\n') + 1));
    out.flush();
    if (!out) return error_response(500, "io_error", "write to annotation store failed");
  }
  by_id_[a.annotation_id] = stored_.size();
  ++counts_[key];
  seen_[a.annotator_id].insert(key);
  stored_.push_back(std::move(a));
  return {201, json{{"stored", true}, {"duplicate", false}}.dump()};
}

Response AnnotationService::stats(bool qualified_only) const {
  std::lock_guard lock(mu_);
  std::vector<Annotation> use;
  for (const auto& a : stored_) {
    if (!qualified_only || qualified_.count(a.annotator_id)) use.push_back(a);
  }
  const auto stats = pair_stats(use);
  json pairs = json::array();
  for (const auto& s : stats) {
    pairs.push_back({{"pair_id", pair_id(s.pair)},
                     {"first", s.pair.first},
                     {"second", s.pair.second},
                     {"n_first", s.n_first},
                     {"n_second", s.n_second},
                     {"agreement", s.agreement}});
  }
  json hist = json::array();
  const auto bins = bin_agreements(stats);
  for (std::size_t b = 0; b < kAgreementBins; ++b) {
    hist.push_back({{"bin", agreement_bin_label(b)}, {"pairs", bins[b]}});
  }
  return {200, json{{"annotations", use.size()},
                    {"pairs_total", pairs_.size()},
                    {"pairs_annotated", stats.size()},
                    {"qualified_only", qualified_only},
                    {"histogram", hist},
                    {"pairs", pairs}}
                   .dump()};
}

Response AnnotationService::qualification() const {
  json items = json::array();
  for (const auto& e : easy_) {
    items.push_back({{"realization_a", e.pair.first}, {"realization_b", e.pair.second}});
  }
  return {200, json{{"pairs", items}, {"pass_fraction", options_.qualification_pass}}.dump()};
}

Response AnnotationService::grade_qualification(const std::string& json_body) {
  json j;
  try {
    j = json::parse(json_body);
  } catch (const json::parse_error& e) {
    return error_response(400, "parse_error", e.what());
  }
  std::string annotator;
  std::size_t correct = 0;
  try {
    annotator = j.at("annotator_id").get<std::string>();
    std::map<PairKey, std::string> answers;
    for (const auto& ans : j.at("answers")) {
      const auto a = ans.at("realization_a").get<std::string>();
      const auto b = ans.at("realization_b").get<std::string>();
      const auto choice = ans.at("choice").get<std::string>();
      if (choice != "a" && choice != "b") return error_response(400, "validation_error", "choice must be \"a\" or \"b\"");
      answers[PairKey::of(a, b)] = choice == "a" ? a : b;
    }
    for (const auto& e : easy_) {
      const auto it = answers.find(e.pair);
      if (it != answers.end() && it->second == e.better) ++correct;
    }
  } catch (const json::exception& e) {
    return error_response(400, "validation_error", e.what());
  }
  if (easy_.empty()) return error_response(409, "capability_error", "dataset offers no easy pairs for qualification");
  const double score = static_cast<double>(correct) / static_cast<double>(easy_.size());
  const bool passed = score >= options_.qualification_pass;
  std::lock_guard lock(mu_);
  if (passed) qualified_.insert(annotator);
  return {200, json{{"annotator_id", annotator}, {"correct", correct}, {"total", easy_.size()}, {"passed", passed}}.dump()};
}

std::vector<Annotation> AnnotationService::annotations() const {
  std::lock_guard lock(mu_);
  return stored_;
}

}  // namespace rulebench
