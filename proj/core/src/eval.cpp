#include "rulebench/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rulebench/error.hpp"
#include "rulebench/rng.hpp"
#include "rulebench/text_io.hpp"

namespace rulebench {

namespace {

std::vector<std::vector<std::string>> partition(const std::vector<std::string>& items, std::size_t k) {
  std::vector<std::vector<std::string>> folds(k);
  const std::size_t base = items.size() / k;
  const std::size_t extra = items.size() % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(items.begin() + static_cast<std::ptrdiff_t>(pos), items.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

}  // namespace

FoldPlan plan_folds(std::vector<std::string> scenario_ids, std::uint64_t seed, std::size_t repeats,
                    std::size_t outer_folds, std::size_t inner_folds) {
  std::sort(scenario_ids.begin(), scenario_ids.end());
  if (std::adjacent_find(scenario_ids.begin(), scenario_ids.end()) != scenario_ids.end()) {
    throw ValidationError("duplicate scenario id in fold plan input");
  }
  if (outer_folds < 2) throw ValidationError("need at least 2 outer folds");
  if (scenario_ids.size() < outer_folds) {
    throw ValidationError("need at least " + std::to_string(outer_folds) + " scenarios, got " +
                          std::to_string(scenario_ids.size()));
  }
  if (repeats == 0 || inner_folds < 2) throw ValidationError("need repeats >= 1 and inner folds >= 2");
  FoldPlan plan;
  plan.seed = seed;
  for (std::size_t r = 0; r < repeats; ++r) {
    Rng rng(mix_seed(seed, r));
    auto shuffled = scenario_ids;
    rng.shuffle(shuffled);
    auto outer = partition(shuffled, outer_folds);
    std::vector<std::vector<std::vector<std::string>>> inner;
    for (std::size_t f = 0; f < outer_folds; ++f) {
      std::vector<std::string> training;
      for (std::size_t g = 0; g < outer_folds; ++g) {
        if (g != f) training.insert(training.end(), outer[g].begin(), outer[g].end());
      }
      std::sort(training.begin(), training.end());
      Rng inner_rng(mix_seed(mix_seed(seed, r), 1000 + f));
      inner_rng.shuffle(training);
      inner.push_back(partition(training, std::min(inner_folds, training.size())));
    }
    plan.outer.push_back(std::move(outer));
    plan.inner.push_back(std::move(inner));
  }
  return plan;
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) throw DomainError("prediction and label counts differ");
  if (labels.empty()) throw DomainError("accuracy of an empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i] ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

StratifiedAccuracy stratified_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels,
                                       const std::vector<double>& agreements) {
  if (predictions.size() != labels.size() || labels.size() != agreements.size()) {
    throw DomainError("prediction, label and agreement counts differ");
  }
  StratifiedAccuracy out;
  std::array<std::size_t, kAgreementBins> correct{};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t b = agreement_bin(agreements[i]);
    ++out.counts[b];
    correct[b] += predictions[i] == labels[i] ? 1 : 0;
  }
  for (std::size_t b = 0; b < kAgreementBins; ++b) {
    if (out.counts[b] > 0) out.percent[b] = 100.0 * static_cast<double>(correct[b]) / static_cast<double>(out.counts[b]);
  }
  return out;
}

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DomainError("correlation inputs differ in length");
  Correlation c;
  if (x.size() < 2) return c;
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    c.r = std::nan("");
    return c;
  }
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  c.defined = true;
  return c;
}

namespace {

struct AnnotatorTally {
  std::set<PairKey> pairs;
  std::size_t total = 0;
  std::size_t human_correct = 0;
  std::size_t model_correct = 0;
};

int vote_for_first(const Annotation& a, const PairKey& key) { return a.winner() == key.first ? 1 : -1; }

}  // namespace

std::optional<double> annotator_loss_L(const PairVerdicts& model, const PairVerdicts& truth,
                                       const std::vector<Annotation>& annotations) {
  std::map<std::string, AnnotatorTally> tallies;
  for (const auto& a : annotations) {
    const PairKey key = PairKey::of(a.realization_a, a.realization_b);
    const auto t = truth.find(key);
    const auto m = model.find(key);
    if (t == truth.end() || m == model.end()) continue;
    auto& tally = tallies[a.annotator_id];
    tally.pairs.insert(key);
    ++tally.total;
    tally.human_correct += vote_for_first(a, key) == t->second ? 1 : 0;
    tally.model_correct += m->second == t->second ? 1 : 0;
  }
  std::size_t qualifying = 0;
  std::size_t lost = 0;
  for (const auto& [id, tally] : tallies) {
    if (tally.pairs.size() < kMinAnnotatorPairs) continue;
    ++qualifying;
    lost += tally.human_correct > tally.model_correct ? 1 : 0;  // same denominator
  }
  if (qualifying == 0) return std::nullopt;
  return 100.0 * static_cast<double>(lost) / static_cast<double>(qualifying);
}

AgreementDistribution annotator_agreement_distribution(const std::vector<Annotation>& annotations,
                                                       const PairVerdicts& truth) {
  std::map<std::string, AnnotatorTally> tallies;
  for (const auto& a : annotations) {
    const PairKey key = PairKey::of(a.realization_a, a.realization_b);
    const auto t = truth.find(key);
    if (t == truth.end()) continue;
    auto& tally = tallies[a.annotator_id];
    tally.pairs.insert(key);
    ++tally.total;
    tally.human_correct += vote_for_first(a, key) == t->second ? 1 : 0;
  }
  AgreementDistribution out;
  std::vector<double> values;
  for (const auto& [id, tally] : tallies) {
    if (tally.pairs.size() < kMinAnnotatorPairs) continue;
    const double pct = 100.0 * static_cast<double>(tally.human_correct) / static_cast<double>(tally.total);
    out.per_annotator.emplace_back(id, pct);
    values.push_back(pct);
    ++out.histogram[std::min<std::size_t>(9, static_cast<std::size_t>(pct / 10.0))];
  }
  if (!values.empty()) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    out.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  }
  return out;
}

PairVerdicts truth_from_labels(const std::vector<LabeledPair>& pairs) {
  PairVerdicts out;
  for (const auto& p : pairs) {
    const PairKey key = PairKey::of(p.first, p.second);
    out[key] = p.first == key.first ? p.label : -p.label;
  }
  return out;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  for (const double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

Samples to_samples(const std::vector<LabeledPair>& pairs, bool include_mirrored) {
  Samples s;
  s.dim = kRuleCount;
  for (const auto& p : pairs) {
    if (p.mirrored && !include_mirrored) continue;
    const auto f = p.features();
    s.add(f, p.label);
  }
  return s;
}

// ---- nested cross-validation -------------------------------------------------

namespace {

enum class CandidateType { ml, rb, rb_dt };

struct Candidate {
  std::string name;
  CandidateType type = CandidateType::ml;
  ModelGrid grid;
};

struct Split {
  Samples train;                        // pairs + mirrors
  std::vector<const LabeledPair*> test;  // unique pairs
};

Split make_split(const std::vector<LabeledPair>& pairs, const std::set<std::string>& train_scen,
                 const std::set<std::string>& test_scen) {
  Split s;
  s.train.dim = kRuleCount;
  for (const auto& p : pairs) {
    if (train_scen.count(p.scenario_id)) {
      s.train.add(p.features(), p.label);
    } else if (test_scen.count(p.scenario_id) && !p.mirrored) {
      s.test.push_back(&p);
    }
  }
  return s;
}

int rb_verdict(const Rulebook& rb, const LabeledPair& p) {
  const auto c = rb.compare(p.lhs.view(), p.rhs.view());
  if (c.outcome == Outcome::first_preferred) return 1;
  if (c.outcome == Outcome::second_preferred) return -1;
  return 0;
}

// RB+DT predictions on `test`, with the fallback tree trained on `train`.
std::vector<int> rb_dt_predict(const Rulebook& rb, const Samples& train, std::size_t depth,
                               const std::vector<const LabeledPair*>& test) {
  const DecisionTree dt = train_tree(train, {depth, 0, 0});
  std::vector<int> out;
  out.reserve(test.size());
  for (const auto* p : test) {
    const int v = rb_verdict(rb, *p);
    out.push_back(v != 0 ? v : dt.predict(p->features()));
  }
  return out;
}

std::vector<int> labels_of(const std::vector<const LabeledPair*>& test) {
  std::vector<int> out;
  out.reserve(test.size());
  for (const auto* p : test) out.push_back(p->label);
  return out;
}

double inner_accuracy(const std::vector<int>& pred, const std::vector<const LabeledPair*>& test) {
  return accuracy(pred, labels_of(test));
}

std::vector<int> ml_predict(const TrainedModel& m, const std::vector<const LabeledPair*>& test) {
  std::vector<int> out;
  out.reserve(test.size());
  for (const auto* p : test) out.push_back(predict(m, p->features()));
  return out;
}

void finish_fold(FoldResult& r, const std::vector<int>& pred, const std::vector<const LabeledPair*>& test,
                 const EvalOptions& options, const PairVerdicts& truth) {
  std::vector<int> labels;
  std::vector<double> agreements;
  std::vector<int> kept;
  PairVerdicts model;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (pred[i] == 0) continue;
    kept.push_back(pred[i]);
    labels.push_back(test[i]->label);
    agreements.push_back(test[i]->agreement);
    const PairKey key = PairKey::of(test[i]->first, test[i]->second);
    model[key] = test[i]->first == key.first ? pred[i] : -pred[i];
  }
  r.n_test = test.size();
  r.n_predicted = kept.size();
  r.accuracy = kept.empty() ? std::nan("") : accuracy(kept, labels);
  r.stratified = stratified_accuracy(kept, labels, agreements);
  if (options.annotations != nullptr) r.loss_L = annotator_loss_L(model, truth, *options.annotations);
}

}  // namespace

MetricsReport nested_cv(const std::vector<ModelGrid>& grids, const std::vector<LabeledPair>& pairs,
                        const FoldPlan& plan, const EvalOptions& options) {
  if (pairs.empty()) throw ValidationError("no labeled pairs to evaluate");
  std::vector<Candidate> candidates;
  for (const auto& g : grids) {
    if (g.points.empty()) throw ConfigError(std::string("empty grid for ") + std::string(to_string(g.kind)));
    candidates.push_back({std::string(to_string(g.kind)), CandidateType::ml, g});
  }
  if (options.rulebook != nullptr) {
    candidates.push_back({"RB", CandidateType::rb, {}});
    candidates.push_back({"RB+DT", CandidateType::rb_dt, {}});
  }
  const PairVerdicts truth = truth_from_labels(pairs);

  MetricsReport report;
  report.repeats = plan.repeats();
  report.outer_folds = plan.outer.empty() ? 0 : plan.outer.front().size();
  report.models.resize(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) report.models[c].name = candidates[c].name;

  for (std::size_t r = 0; r < plan.repeats(); ++r) {
    const auto& outer = plan.outer[r];
    for (std::size_t f = 0; f < outer.size(); ++f) {
      const std::set<std::string> test_scen(outer[f].begin(), outer[f].end());
      std::set<std::string> train_scen;
      for (std::size_t g = 0; g < outer.size(); ++g) {
        if (g != f) train_scen.insert(outer[g].begin(), outer[g].end());
      }
      const Split split = make_split(pairs, train_scen, test_scen);
      if (split.test.empty() || split.train.size() == 0) {
        report.warnings.push_back("repeat " + std::to_string(r) + " fold " + std::to_string(f) +
                                  ": no test or training pairs, skipped");
        continue;
      }
      std::vector<Split> inner;
      for (const auto& group : plan.inner[r][f]) {
        const std::set<std::string> val(group.begin(), group.end());
        std::set<std::string> fit;
        for (const auto& s : train_scen) {
          if (!val.count(s)) fit.insert(s);
        }
        Split s = make_split(pairs, fit, val);
        if (!s.test.empty() && s.train.size() > 0) inner.push_back(std::move(s));
      }
      const std::uint64_t fold_seed = mix_seed(plan.seed, 7919 * r + f + 1);

      for (std::size_t c = 0; c < candidates.size(); ++c) {
        const Candidate& cand = candidates[c];
        FoldResult res;
        res.repeat = r;
        res.fold = f;
        if (cand.type == CandidateType::rb) {
          std::vector<int> pred;
          for (const auto* p : split.test) pred.push_back(rb_verdict(*options.rulebook, *p));
          finish_fold(res, pred, split.test, options, truth);
        } else if (cand.type == CandidateType::rb_dt) {
          std::size_t best_depth = options.fallback_depths.front();
          double best = -1.0;
          for (const std::size_t depth : options.fallback_depths) {
            if (inner.empty()) break;
            double sum = 0.0;
            for (const auto& s : inner) sum += inner_accuracy(rb_dt_predict(*options.rulebook, s.train, depth, s.test), s.test);
            const double mean = sum / static_cast<double>(inner.size());
            if (mean > best) {
              best = mean;
              best_depth = depth;
            }
          }
          res.chosen["fallback_depth"] = static_cast<double>(best_depth);
          finish_fold(res, rb_dt_predict(*options.rulebook, split.train, best_depth, split.test), split.test, options,
                      truth);
        } else {
          std::size_t best_point = 0;
          if (cand.grid.points.size() > 1 && !inner.empty()) {
            double best = -1.0;
            for (std::size_t i = 0; i < cand.grid.points.size(); ++i) {
              double sum = 0.0;
              for (std::size_t k = 0; k < inner.size(); ++k) {
                const ModelSpec spec{cand.grid.kind, cand.grid.points[i], mix_seed(fold_seed, 31 * k + 17)};
                sum += inner_accuracy(ml_predict(train(spec, inner[k].train), inner[k].test), inner[k].test);
              }
              const double mean = sum / static_cast<double>(inner.size());
              if (mean > best) {
                best = mean;
                best_point = i;
              }
            }
          }
          res.chosen = cand.grid.points[best_point];
          const TrainedModel model = train({cand.grid.kind, res.chosen, fold_seed}, split.train);
          finish_fold(res, ml_predict(model, split.test), split.test, options, truth);
          std::vector<double> conf;
          std::vector<double> agree;
          for (const auto* p : split.test) {
            conf.push_back(confidence(model, p->features()));
            agree.push_back(p->agreement);
          }
          res.correlation = pearson(conf, agree);
        }
        report.models[c].folds.push_back(std::move(res));
      }
    }
  }

  for (std::size_t c = 0; c < candidates.size(); ++c) {
    auto& m = report.models[c];
    std::vector<double> acc;
    std::vector<double> loss;
    std::vector<double> corr;
    std::vector<double> coverage;
    std::array<std::vector<double>, kAgreementBins> bins;
    for (const auto& f : m.folds) {
      if (!std::isnan(f.accuracy)) acc.push_back(f.accuracy);
      if (f.loss_L) loss.push_back(*f.loss_L);
      if (f.correlation.defined) corr.push_back(f.correlation.r);
      coverage.push_back(100.0 * static_cast<double>(f.n_predicted) / static_cast<double>(f.n_test));
      for (std::size_t b = 0; b < kAgreementBins; ++b) {
        if (f.stratified.percent[b]) bins[b].push_back(*f.stratified.percent[b]);
      }
    }
    m.accuracy = summarize(acc);
    for (std::size_t b = 0; b < kAgreementBins; ++b) {
      if (!bins[b].empty()) m.stratified[b] = summarize(bins[b]);
    }
    if (!loss.empty()) m.loss_L = summarize(loss);
    if (!corr.empty()) m.correlation = summarize(corr);
    if (candidates[c].type == CandidateType::rb) m.coverage = summarize(coverage);
  }
  return report;
}

// ---- report formatting --------------------------------------------------------

namespace {

std::string pm(const Summary& s) { return format_fixed(s.mean, 1) + " ± " + format_fixed(s.std, 1); }
std::string pm(const std::optional<Summary>& s) { return s ? pm(*s) : "-"; }
std::string pm2(const std::optional<Summary>& s) {
  return s ? format_fixed(s->mean, 2) + " ± " + format_fixed(s->std, 2) : "-";
}

std::string pad(const std::string& s, std::size_t width) {
  // "±" is two bytes but one column.
  std::size_t cols = 0;
  for (const unsigned char ch : s) cols += (ch & 0xC0) != 0x80 ? 1 : 0;
  return s + std::string(width > cols ? width - cols : 0, ' ');
}

nlohmann::ordered_json summary_json(const std::optional<Summary>& s) {
  if (!s) return nullptr;
  return {{"mean", s->mean}, {"std", s->std}, {"n", s->n}};
}

}  // namespace

std::string report_to_text(const MetricsReport& report) {
  std::ostringstream os;
  os << "Accuracy (%) over " << report.repeats << " repeats x " << report.outer_folds
     << " outer folds; std across all repeat x fold evaluations\n\n";
  std::vector<std::string> header{"Model", "Accuracy"};
  for (std::size_t b = 0; b < kAgreementBins; ++b) header.emplace_back("a in " + std::string(agreement_bin_label(b)));
  header.emplace_back("L (%)");
  header.emplace_back("Pearson r");
  std::vector<std::vector<std::string>> rows{header};
  for (const auto& m : report.models) {
    std::vector<std::string> row{m.name, pm(m.accuracy)};
    for (std::size_t b = 0; b < kAgreementBins; ++b) row.push_back(pm(m.stratified[b]));
    row.push_back(pm(m.loss_L));
    row.push_back(pm2(m.correlation));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::size_t cols = 0;
      for (const unsigned char ch : row[i]) cols += (ch & 0xC0) != 0x80 ? 1 : 0;
      widths[i] = std::max(widths[i], cols);
    }
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << pad(row[i], widths[i] + 2);
    os << "\n";
  }
  for (const auto& m : report.models) {
    if (m.coverage) {
      os << "\n" << m.name << ": accuracy on comparable pairs only; coverage " << pm(*m.coverage) << " %\n";
    }
  }
  for (const auto& w : report.warnings) os << "warning: " << w << "\n";
  return os.str();
}

std::string report_to_json(const MetricsReport& report) {
  using json = nlohmann::ordered_json;
  json j;
  j["format"] = "rulebench.metrics/1";
  j["repeats"] = report.repeats;
  j["outer_folds"] = report.outer_folds;
  j["std_over"] = "repeat x fold evaluations";
  j["models"] = json::array();
  for (const auto& m : report.models) {
    json mj;
    mj["name"] = m.name;
    mj["accuracy"] = summary_json(m.accuracy);
    json bins = json::array();
    for (std::size_t b = 0; b < kAgreementBins; ++b) {
      bins.push_back({{"bin", std::string(agreement_bin_label(b))}, {"accuracy", summary_json(m.stratified[b])}});
    }
    mj["stratified"] = std::move(bins);
    mj["loss_L"] = summary_json(m.loss_L);
    mj["pearson"] = summary_json(m.correlation);
    mj["coverage"] = summary_json(m.coverage);
    j["models"].push_back(std::move(mj));
  }
  j["warnings"] = report.warnings;
  return j.dump(1) + "\n";
}

std::string folds_to_csv(const MetricsReport& report) {
  std::ostringstream os;
  os << "model,repeat,fold,n_test,n_predicted,accuracy";
  for (std::size_t b = 0; b < kAgreementBins; ++b) os << ",bin" << (b + 1) << "_accuracy,bin" << (b + 1) << "_count";
  os << ",loss_L,pearson,chosen\n";
  for (const auto& m : report.models) {
    for (const auto& f : m.folds) {
      os << m.name << ',' << f.repeat << ',' << f.fold << ',' << f.n_test << ',' << f.n_predicted << ','
         << (std::isnan(f.accuracy) ? "" : format_double(f.accuracy));
      for (std::size_t b = 0; b < kAgreementBins; ++b) {
        os << ',' << (f.stratified.percent[b] ? format_double(*f.stratified.percent[b]) : "") << ','
           << f.stratified.counts[b];
      }
      os << ',' << (f.loss_L ? format_double(*f.loss_L) : "") << ','
         << (f.correlation.defined ? format_double(f.correlation.r) : "") << ',';
      bool first = true;
      for (const auto& [k, v] : f.chosen) {
        os << (first ? "" : ";") << k << '=' << format_double(v);
        first = false;
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace rulebench
