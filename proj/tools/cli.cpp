#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "http_server.hpp"
#include "rulebench/dataset.hpp"
#include "rulebench/error.hpp"
#include "rulebench/eval.hpp"
#include "rulebench/learners.hpp"
#include "rulebench/preferences.hpp"
#include "rulebench/rulebook.hpp"
#include "rulebench/scenario_gen.hpp"
#include "rulebench/text_io.hpp"
#include "rulebench/violations.hpp"
#include "service.hpp"

namespace rulebench {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Everything thrown before `phase` flips to work is reported as a config
// error: nothing has been written yet.
enum class Phase { config, work };

using Scored = std::vector<std::pair<std::string, ViolationVector>>;

struct Common {
  std::string params;  // rule parameter file, empty = built-in defaults
};

RuleParams load_params(const std::string& path) { return path.empty() ? RuleParams{} : load_rule_params(path); }

Rulebook load_rulebook_arg(const std::string& arg) {
  return arg == "builtin" ? default_rulebook() : load_rulebook(arg);
}

std::vector<std::size_t> parse_rule_list(const std::string& text) {
  std::vector<std::size_t> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) {
    try {
      out.push_back(rule_index(trim(part)));
    } catch (const LookupError& e) {
      throw ConfigError(std::string("rule list: ") + e.what());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Scored score_dataset(const Dataset& ds, const RuleParams& params) {
  Scored rows;
  rows.reserve(ds.realizations.size());
  for (const auto& w : ds.realizations) {
    const auto& sc = ds.scenario(w.scenario_id);
    rows.emplace_back(w.id, violation_vector(w, sc, ds.map(sc.map_id), params));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return rows;
}

Scored load_or_score(const Dataset& ds, const std::string& violations, const RuleParams& params) {
  if (violations.empty()) return score_dataset(ds, params);
  auto rows = violations_from_csv(read_file(violations), violations);
  std::set<std::string> have;
  for (const auto& [id, v] : rows) have.insert(id);
  for (const auto& w : ds.realizations) {
    if (!have.count(w.id)) throw LinkError(violations + ": no row for realization '" + w.id + "'");
  }
  return rows;
}

void prepare_dir(const fs::path& dir) {
  fs::create_directories(dir);
  if (!fs::is_directory(dir)) throw ConfigError("output directory '" + dir.string() + "' is not a directory");
}

void check_writable(const fs::path& dir) {
  if (fs::exists(dir) && !fs::is_directory(dir)) {
    throw ConfigError("output path '" + dir.string() + "' exists and is not a directory");
  }
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
  Common common;
  std::string out;
  bool overwrite = false;
  std::size_t scenarios = 40;
  std::size_t realizations = 4;
  std::size_t min_episodes = 3;
  std::size_t max_episodes = 7;
  std::string rule_pool;
  std::uint64_t seed = 1;
  std::size_t annotators = 25;
  std::size_t per_pair = 10;
  std::string noise = "logistic";
  double flip_rate = 0.15;
  std::optional<double> beta;
  std::string truth = "utility";
  std::string rulebook = "builtin";
  std::uint64_t crowd_seed = 1;
};

void cmd_generate(const GenerateArgs& a, Phase& phase, std::ostream& out) {
  const RuleParams params = load_params(a.common.params);
  GenerateConfig g;
  g.scenarios = a.scenarios;
  g.realizations_per_scenario = a.realizations;
  g.min_episodes = a.min_episodes;
  g.max_episodes = a.max_episodes;
  g.rule_pool = parse_rule_list(a.rule_pool);
  g.seed = a.seed;
  if (g.scenarios == 0 || g.realizations_per_scenario < 2) {
    throw ConfigError("need at least one scenario and two realizations per scenario");
  }
  if (g.min_episodes > g.max_episodes) throw ConfigError("min-episodes exceeds max-episodes");

  CrowdSpec c;
  c.annotators = a.annotators;
  c.annotations_per_pair = a.per_pair;
  c.seed = a.crowd_seed;
  if (a.noise == "noiseless") {
    c.noise = NoiseKind::noiseless;
  } else if (a.noise == "uniform") {
    c.noise = NoiseKind::uniform_flip;
  } else if (a.noise == "logistic") {
    c.noise = NoiseKind::logistic;
  } else {
    throw ConfigError("unknown noise model '" + a.noise + "'");
  }
  if (!(a.flip_rate >= 0.0 && a.flip_rate <= 1.0)) throw ConfigError("flip-rate must lie in [0, 1]");
  c.flip_rate = a.flip_rate;
  std::optional<Rulebook> rb;
  if (a.truth == "rulebook") {
    c.truth = TruthKind::rulebook;
    rb = load_rulebook_arg(a.rulebook);
  } else if (a.truth != "utility") {
    throw ConfigError("unknown truth model '" + a.truth + "'");
  }
  if (c.annotations_per_pair == 0 || c.annotations_per_pair > c.annotators) {
    throw ConfigError("annotations per pair must lie in [1, annotators]");
  }
  const fs::path root(a.out);
  check_writable(root);
  if (fs::exists(root / "dataset") && !fs::is_empty(root / "dataset") && !a.overwrite) {
    throw ConfigError("'" + (root / "dataset").string() + "' is not empty; pass --overwrite to replace it");
  }
  phase = Phase::work;

  auto gen = generate_dataset(g);
  const auto scored = score_dataset(gen.dataset, params);
  std::map<std::string, ViolationVector> vectors(scored.begin(), scored.end());
  const auto truth = ground_truth(gen.dataset, vectors, c, rb ? &*rb : nullptr);
  if (c.noise == NoiseKind::logistic) {
    if (a.beta) {
      c.beta = *a.beta;
    } else if (c.flip_rate == 0.0) {
      c.noise = NoiseKind::noiseless;
    } else {
      std::vector<double> gaps;
      for (const auto& t : truth) gaps.push_back(t.gap);
      c.beta = calibrate_beta(gaps, c.flip_rate);
    }
  }
  const auto annotations = simulate_crowd(truth, c);

  json manifest = json::parse(gen.manifest_json);
  manifest["crowd"] = {{"annotators", c.annotators},
                       {"annotations_per_pair", c.annotations_per_pair},
                       {"noise", a.noise},
                       {"flip_rate", c.flip_rate},
                       {"beta", c.noise == NoiseKind::logistic ? json(c.beta) : json(nullptr)},
                       {"truth", a.truth},
                       {"seed", c.seed}};

  std::ostringstream truth_csv;
  truth_csv << "first,second,label,gap\n";
  for (const auto& t : truth) {
    truth_csv << t.pair.first << ',' << t.pair.second << ',' << t.label << ',' << format_double(t.gap) << '\n';
  }

  prepare_dir(root);
  if (a.overwrite) fs::remove_all(root / "dataset");
  save_dataset(gen.dataset, root / "dataset");
  write_file_atomic(root / "violations.csv", violations_to_csv(scored));
  write_file_atomic(root / "truth.csv", truth_csv.str());
  write_file_atomic(root / "annotations.csv", annotations_to_csv(annotations));
  write_file_atomic(root / "manifest.json", manifest.dump(1) + "\n");

  std::size_t clean = 0, violated = 0;
  for (const auto& [id, v] : scored) {
    clean += v.is_zero();
    violated += v.violated_count();
  }
  out << "scenarios " << gen.dataset.scenarios.size() << ", realizations " << scored.size() << ", pairs "
      << truth.size() << ", annotations " << annotations.size() << "\n";
  out << "violation-free realizations " << clean << ", mean violated rules "
      << format_fixed(static_cast<double>(violated) / static_cast<double>(scored.size()), 2) << "\n";
  if (c.noise == NoiseKind::logistic) out << "logistic noise beta " << format_double(c.beta) << "\n";
}

// ---- plant ------------------------------------------------------------------

struct PlantArgs {
  Common common;
  std::string rule;
  double severity = 1.0;
  std::string template_id = "map_U";
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_plant(const PlantArgs& a, Phase& phase, std::ostream& out) {
  const RuleParams params = load_params(a.common.params);
  if (a.rule != "none") (void)parse_rule_list(a.rule);
  if (a.template_id != "map_U" && a.template_id != "map_S") throw ConfigError("unknown template '" + a.template_id + "'");
  check_writable(a.out);
  phase = Phase::work;

  PlantSpec spec{a.rule, a.severity, a.template_id, a.seed};
  const auto r = plant_violation(spec, params);
  Dataset ds;
  ds.maps.push_back(r.map);
  ds.scenarios.push_back(r.scenario);
  ds.realizations.push_back(r.realization);
  prepare_dir(a.out);
  save_dataset(ds, fs::path(a.out) / "dataset");
  const Scored rows{{r.realization.id, r.vector}};
  write_file_atomic(fs::path(a.out) / "violations.csv", violations_to_csv(rows));
  out << "planted " << a.rule << " on " << a.template_id << ": knob " << format_double(r.knob);
  if (a.rule != "none") out << ", severity " << format_double(r.vector[rule_index(a.rule)]);
  out << "\n";
  for (std::size_t i = 0; i < kRuleCount; ++i) {
    if (r.vector[i] > 0.0) out << "  " << rule_id(i) << " " << format_double(r.vector[i]) << "\n";
  }
}

// ---- score ------------------------------------------------------------------

struct ScoreArgs {
  Common common;
  std::string dataset;
  std::string out;
};

void cmd_score(const ScoreArgs& a, Phase& phase, std::ostream& out) {
  const RuleParams params = load_params(a.common.params);
  const Dataset ds = load_dataset(a.dataset);
  phase = Phase::work;
  const auto rows = score_dataset(ds, params);
  write_file_atomic(a.out, violations_to_csv(rows));
  out << "scored " << rows.size() << " realizations\n";
}

// ---- compare ----------------------------------------------------------------

struct CompareArgs {
  Common common;
  std::string dataset;
  std::string rulebook = "builtin";
  std::string annotations;
  std::string violations;
  std::string out;
};

void cmd_compare(const CompareArgs& a, Phase& phase, std::ostream& out) {
  const RuleParams params = load_params(a.common.params);
  const Rulebook rb = load_rulebook_arg(a.rulebook);
  if (rb.required_width() > kRuleCount) throw ConfigError("rulebook reads columns beyond r14");
  const Dataset ds = load_dataset(a.dataset);
  std::vector<PairKey> pairs;
  if (!a.annotations.empty()) {
    const auto ann = load_annotations(a.annotations);
    validate_annotations(ann, ds);
    for (const auto& s : pair_stats(ann)) pairs.push_back(s.pair);
  }
  phase = Phase::work;

  const auto scored = load_or_score(ds, a.violations, params);
  std::map<std::string, ViolationVector> vectors(scored.begin(), scored.end());
  if (a.annotations.empty()) {
    std::map<std::string, std::vector<std::string>> by_scenario;
    for (const auto& w : ds.realizations) by_scenario[w.scenario_id].push_back(w.id);
    for (auto& [sid, ids] : by_scenario) {
      std::sort(ids.begin(), ids.end());
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j) pairs.push_back(PairKey::of(ids[i], ids[j]));
    }
    std::sort(pairs.begin(), pairs.end());
  }

  std::ostringstream csv;
  csv << "first,second,outcome,deciding_rules\n";
  std::size_t first = 0, second = 0, incomparable = 0;
  for (const auto& p : pairs) {
    const auto c = rb.compare(vectors.at(p.first).view(), vectors.at(p.second).view());
    std::string deciding;
    for (const auto r : c.deciding_rules) {
      if (!deciding.empty()) deciding += ' ';
      deciding += rb.rules()[r].id;
    }
    csv << p.first << ',' << p.second << ',' << to_string(c.outcome) << ',' << deciding << '\n';
    if (c.outcome == Outcome::first_preferred) ++first;
    if (c.outcome == Outcome::second_preferred) ++second;
    if (c.outcome == Outcome::incomparable) ++incomparable;
  }
  if (!a.out.empty()) write_file_atomic(a.out, csv.str());
  out << "pairs " << pairs.size() << ", comparable " << (first + second) << " (first preferred " << first
      << ", second preferred " << second << "), incomparable " << incomparable << "\n";
}

// ---- label ------------------------------------------------------------------

struct LabelArgs {
  Common common;
  std::string dataset;
  std::string annotations;
  std::string violations;
  std::string out;
};

void cmd_label(const LabelArgs& a, Phase& phase, std::ostream& out) {
  const RuleParams params = load_params(a.common.params);
  const Dataset ds = load_dataset(a.dataset);
  const auto ann = load_annotations(a.annotations);
  validate_annotations(ann, ds);
  check_writable(a.out);
  phase = Phase::work;

  const auto scored = load_or_score(ds, a.violations, params);
  std::map<std::string, RealizationInfo> info;
  for (const auto& [id, v] : scored) info[id] = {ds.realization(id).scenario_id, v};
  std::vector<std::string> items;
  for (const auto& w : ds.realizations) items.push_back(w.id);
  std::sort(items.begin(), items.end());

  const auto stats = pair_stats(ann);
  const auto bins = bin_agreements(stats);
  const auto bt = fit_bradley_terry(stats, items);
  const auto labels = make_labeled_pairs(stats, bt, info);
  const auto dist = annotator_agreement_distribution(ann, truth_from_labels(labels.pairs));

  std::ostringstream hist;
  hist << "bin,pairs,percent\n";
  for (std::size_t b = 0; b < kAgreementBins; ++b) {
    const double pct = stats.empty() ? 0.0 : 100.0 * static_cast<double>(bins[b]) / static_cast<double>(stats.size());
    hist << agreement_bin_label(b) << ',' << bins[b] << ',' << format_fixed(pct, 2) << '\n';
  }
  std::ostringstream agree;
  agree << "annotator_id,agreement_percent\n";
  for (const auto& [id, pct] : dist.per_annotator) agree << id << ',' << format_fixed(pct, 4) << '\n';

  std::set<std::string> scenarios;
  for (const auto& s : stats) scenarios.insert(info.at(s.pair.first).scenario_id);
  std::set<std::string> realizations;
  for (const auto& s : stats) {
    realizations.insert(s.pair.first);
    realizations.insert(s.pair.second);
  }
  std::ostringstream summary;
  summary << "annotations " << ann.size() << "\n";
  summary << "pairs " << stats.size() << "\n";
  summary << "realizations " << realizations.size() << "\n";
  summary << "scenarios " << scenarios.size() << "\n";
  summary << "histogram";
  for (const auto n : bins) summary << ' ' << n;
  summary << "\n";
  summary << "labeled_pairs " << labels.pairs.size() / 2 << " (excluded ties " << labels.excluded_ties << ")\n";
  summary << "bt_iterations " << bt.iterations << (bt.converged ? "" : " (not converged)") << "\n";
  summary << "bt_flagged_components " << bt.flagged_components.size() << "\n";
  summary << "median_annotator_agreement "
          << (dist.median ? format_fixed(*dist.median, 2) : std::string("n/a")) << "\n";

  const fs::path root(a.out);
  prepare_dir(root);
  write_file_atomic(root / "pair_stats.csv", pair_stats_to_csv(stats));
  write_file_atomic(root / "histogram.csv", hist.str());
  write_file_atomic(root / "bt_scores.csv", bt_scores_to_csv(bt));
  write_file_atomic(root / "labeled_pairs.csv", labeled_pairs_to_csv(labels.pairs));
  write_file_atomic(root / "annotator_agreement.csv", agree.str());
  write_file_atomic(root / "summary.txt", summary.str());
  out << summary.str();
}

// ---- train-eval -------------------------------------------------------------

struct TrainEvalArgs {
  std::string labels;
  std::string annotations;
  std::string rulebook;
  std::string grid;
  std::string models;
  std::size_t repeats = 10;
  std::size_t outer = 5;
  std::size_t inner = 10;
  std::uint64_t seed = 1;
  std::string out;
};

void cmd_train_eval(const TrainEvalArgs& a, Phase& phase, std::ostream& out) {
  auto grids = a.grid.empty() ? parse_model_grids(default_model_grid_text(), "<builtin grid>") : load_model_grids(a.grid);
  bool want_rb = !a.rulebook.empty();
  if (!a.models.empty()) {
    std::set<ModelKind> keep;
    bool rb_named = false;
    for (const auto& part : split(a.models, ',')) {
      const auto name = std::string(trim(part));
      if (name == "RB" || name == "RB+DT") {
        rb_named = true;
        continue;
      }
      try {
        keep.insert(model_kind_from_string(name));
      } catch (const LookupError& e) {
        throw ConfigError(std::string("--models: ") + e.what());
      }
    }
    if (rb_named && !want_rb) throw ConfigError("--models names RB but no --rulebook was given");
    want_rb = want_rb && rb_named;
    std::erase_if(grids, [&](const ModelGrid& g) { return !keep.count(g.kind); });
  }
  std::optional<Rulebook> rb;
  if (want_rb) rb = load_rulebook_arg(a.rulebook);
  if (grids.empty() && !rb) throw ConfigError("no models selected");
  if (a.repeats == 0 || a.outer < 2 || a.inner < 2) throw ConfigError("need repeats >= 1 and at least two folds");
  const auto pairs = parse_labeled_pairs(read_file(a.labels), a.labels);
  std::optional<std::vector<Annotation>> ann;
  if (!a.annotations.empty()) ann = load_annotations(a.annotations);
  check_writable(a.out);
  phase = Phase::work;

  std::set<std::string> sids;
  for (const auto& p : pairs) sids.insert(p.scenario_id);
  const auto plan = plan_folds({sids.begin(), sids.end()}, a.seed, a.repeats, a.outer, a.inner);
  EvalOptions opt;
  if (rb) opt.rulebook = &*rb;
  if (ann) opt.annotations = &*ann;
  const auto report = nested_cv(grids, pairs, plan, opt);

  const fs::path root(a.out);
  prepare_dir(root);
  const auto text = report_to_text(report);
  write_file_atomic(root / "metrics.txt", text);
  write_file_atomic(root / "metrics.json", report_to_json(report));
  write_file_atomic(root / "folds.csv", folds_to_csv(report));
  out << text;
}

// ---- serve ------------------------------------------------------------------

struct ServeArgs {
  Common common;
  std::string dataset;
  std::string store;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 1;
};

void cmd_serve(const ServeArgs& a, Phase& phase, std::ostream& out) {
  ServiceOptions opt;
  opt.params = load_params(a.common.params);
  opt.store = a.store;
  opt.seed = a.seed;
  AnnotationService service(load_dataset(a.dataset), opt);
  httplib::Server server;
  install_routes(server, service);
  if (!server.bind_to_port(a.host, a.port)) {
    throw ConfigError("cannot bind " + a.host + ":" + std::to_string(a.port));
  }
  phase = Phase::work;
  out << "serving " << service.pair_count() << " pairs on http://" << a.host << ":" << a.port << "/api\n";
  out.flush();
  server.listen_after_bind();
}

// ---- lint-rulebook ----------------------------------------------------------

void cmd_lint(const std::string& path, Phase& phase, std::ostream& out) {
  const Rulebook rb = load_rulebook_arg(path);
  phase = Phase::work;
  out << rb.lint_report();
}

void report(std::ostream& err, std::string_view kind, std::string_view message) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rulebench: rulebook and preference-learning benchmark"};
  app.set_config("--config", "", "TOML/INI file with option values; sections name subcommands");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  auto add_params = [](CLI::App* sub, Common& c) {
    sub->add_option("--params", c.params, "Rule parameter file (key = value)")->check(CLI::ExistingFile);
  };

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic dataset and simulated crowd annotations");
  add_params(g, gen.common);
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_flag("--overwrite", gen.overwrite, "Replace an existing dataset directory");
  g->add_option("--scenarios", gen.scenarios, "Number of scenarios")->capture_default_str();
  g->add_option("--realizations", gen.realizations, "Realizations per scenario")->capture_default_str();
  g->add_option("--min-episodes", gen.min_episodes, "Fewest episodes per scenario")->capture_default_str();
  g->add_option("--max-episodes", gen.max_episodes, "Most episodes per scenario")->capture_default_str();
  g->add_option("--rule-pool", gen.rule_pool, "Comma-separated rules episodes draw from (default: all)");
  g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  g->add_option("--annotators", gen.annotators, "Simulated annotator pool size")->capture_default_str();
  g->add_option("--annotations-per-pair", gen.per_pair, "Annotations per realization pair")->capture_default_str();
  g->add_option("--noise", gen.noise, "noiseless | uniform | logistic")->capture_default_str();
  g->add_option("--flip-rate", gen.flip_rate, "Mean flip probability (uniform, or logistic calibration target)")
      ->capture_default_str();
  g->add_option("--beta", gen.beta, "Logistic noise slope; overrides calibration");
  g->add_option("--truth", gen.truth, "utility | rulebook")->capture_default_str();
  g->add_option("--rulebook", gen.rulebook, "Rulebook file for rulebook truth, or 'builtin'")->capture_default_str();
  g->add_option("--crowd-seed", gen.crowd_seed, "Crowd simulation seed")->capture_default_str();

  PlantArgs plant;
  auto* p = app.add_subcommand("plant", "Build one realization violating a rule at a target severity");
  add_params(p, plant.common);
  p->add_option("--rule", plant.rule, "Rule id r1..r14, or 'none'")->required();
  p->add_option("--severity", plant.severity, "Target severity")->capture_default_str();
  p->add_option("--template", plant.template_id, "map_U | map_S")->capture_default_str();
  p->add_option("--seed", plant.seed, "Template seed")->capture_default_str();
  p->add_option("--out", plant.out, "Output directory")->required();

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Violation vector of every realization");
  add_params(s, score.common);
  s->add_option("--dataset", score.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  s->add_option("--out", score.out, "Output CSV")->required();

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Rulebook verdicts for annotated (or all) realization pairs");
  add_params(c, cmp.common);
  c->add_option("--dataset", cmp.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  c->add_option("--rulebook", cmp.rulebook, "Rulebook file, or 'builtin'")->capture_default_str();
  c->add_option("--annotations", cmp.annotations, "Annotation CSV; default is every within-scenario pair")
      ->check(CLI::ExistingFile);
  c->add_option("--violations", cmp.violations, "Precomputed violations CSV")->check(CLI::ExistingFile);
  c->add_option("--out", cmp.out, "Verdict CSV");

  LabelArgs lab;
  auto* l = app.add_subcommand("label", "Agreement statistics, Bradley-Terry scores and labeled pairs");
  add_params(l, lab.common);
  l->add_option("--dataset", lab.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  l->add_option("--annotations", lab.annotations, "Annotation CSV")->required()->check(CLI::ExistingFile);
  l->add_option("--violations", lab.violations, "Precomputed violations CSV")->check(CLI::ExistingFile);
  l->add_option("--out", lab.out, "Output directory")->required();

  TrainEvalArgs te;
  auto* t = app.add_subcommand("train-eval", "Repeated nested cross-validation of every model kind");
  t->add_option("--labels", te.labels, "labeled_pairs.csv from `label`")->required()->check(CLI::ExistingFile);
  t->add_option("--annotations", te.annotations, "Annotation CSV; enables the annotator loss L")
      ->check(CLI::ExistingFile);
  t->add_option("--rulebook", te.rulebook, "Rulebook file or 'builtin'; adds RB and RB+DT");
  t->add_option("--grid", te.grid, "Model grid JSON (default: built-in grid)")->check(CLI::ExistingFile);
  t->add_option("--models", te.models, "Comma-separated subset, e.g. LR,DT,RF,RB");
  t->add_option("--repeats", te.repeats, "Cross-validation repeats")->capture_default_str();
  t->add_option("--outer", te.outer, "Outer folds")->capture_default_str();
  t->add_option("--inner", te.inner, "Inner folds")->capture_default_str();
  t->add_option("--seed", te.seed, "Fold seed")->capture_default_str();
  t->add_option("--out", te.out, "Output directory")->required();

  ServeArgs serve;
  auto* v = app.add_subcommand("serve", "HTTP API for the annotation UI");
  add_params(v, serve.common);
  v->add_option("--dataset", serve.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  v->add_option("--store", serve.store, "Append-only annotation file")->required();
  v->add_option("--host", serve.host, "Bind address")->capture_default_str();
  v->add_option("--port", serve.port, "Port")->capture_default_str()->check(CLI::Range(1, 65535));
  v->add_option("--seed", serve.seed, "Pair-serving seed")->capture_default_str();

  std::string lint_path;
  auto* lr = app.add_subcommand("lint-rulebook", "Parse a rulebook and list its closure and incomparable pairs");
  lr->add_option("rulebook", lint_path, "Rulebook file, or 'builtin'")->required();

  std::vector<std::string> argv_store{"rulebench"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s2 : argv_store) argv.push_back(s2.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report(err, "usage_error", e.what());
    return kExitConfig;
  }

  Phase phase = Phase::config;
  try {
    if (*g) cmd_generate(gen, phase, out);
    if (*p) cmd_plant(plant, phase, out);
    if (*s) cmd_score(score, phase, out);
    if (*c) cmd_compare(cmp, phase, out);
    if (*l) cmd_label(lab, phase, out);
    if (*t) cmd_train_eval(te, phase, out);
    if (*v) cmd_serve(serve, phase, out);
    if (*lr) cmd_lint(lint_path, phase, out);
  } catch (const Error& e) {
    report(err, e.kind(), e.what());
    return phase == Phase::config ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    report(err, phase == Phase::config ? "config_error" : "internal_error", e.what());
    return phase == Phase::config ? kExitConfig : kExitFailure;
  }
  return kExitOk;
}

}  // namespace rulebench
