#include "rulebench/preferences.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "rulebench/error.hpp"
#include "rulebench/text_io.hpp"

namespace rulebench {

PairKey PairKey::of(std::string_view x, std::string_view y) {
  if (y < x) return {std::string(y), std::string(x)};
  return {std::string(x), std::string(y)};
}

double agreement(std::size_t n1, std::size_t n2) {
  if (n1 + n2 == 0) throw DomainError("agreement of a pair with no votes");
  const double d = n1 > n2 ? static_cast<double>(n1 - n2) : static_cast<double>(n2 - n1);
  return d / static_cast<double>(n1 + n2);
}

std::size_t agreement_bin(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("agreement outside [0, 1]");
  // Upper edges compared exactly so 0.2, 0.4, ... fall in the lower bin.
  constexpr std::array<double, 4> edges{0.2, 0.4, 0.6, 0.8};
  std::size_t bin = 0;
  while (bin < edges.size() && a > edges[bin]) ++bin;
  return bin;
}

std::string_view agreement_bin_label(std::size_t bin) {
  constexpr std::array<std::string_view, kAgreementBins> labels{"[0,0.2]", "(0.2,0.4]", "(0.4,0.6]", "(0.6,0.8]",
                                                                "(0.8,1]"};
  if (bin >= labels.size()) throw RangeError("agreement bin out of range");
  return labels[bin];
}

std::array<std::size_t, kAgreementBins> bin_agreements(const std::vector<PairStats>& stats) {
  std::array<std::size_t, kAgreementBins> counts{};
  for (const auto& s : stats) ++counts[agreement_bin(s.agreement)];
  return counts;
}

std::vector<PairStats> pair_stats(const std::vector<Annotation>& annotations) {
  std::map<PairKey, PairStats> by_pair;
  for (const auto& a : annotations) {
    if (a.realization_a == a.realization_b) {
      throw ValidationError("annotation compares realization '" + a.realization_a + "' with itself");
    }
    const PairKey key = PairKey::of(a.realization_a, a.realization_b);
    auto& s = by_pair[key];
    s.pair = key;
    if (a.winner() == key.first) {
      ++s.n_first;
    } else {
      ++s.n_second;
    }
  }
  std::vector<PairStats> out;
  out.reserve(by_pair.size());
  for (auto& [key, s] : by_pair) {
    s.agreement = agreement(s.n_first, s.n_second);
    out.push_back(std::move(s));
  }
  return out;
}

void validate_annotations(const std::vector<Annotation>& annotations, const Dataset& dataset) {
  for (const auto& a : annotations) {
    if (a.realization_a == a.realization_b) {
      throw ValidationError("annotation by '" + a.annotator_id + "' compares '" + a.realization_a + "' with itself");
    }
    const Realization* ra = dataset.find_realization(a.realization_a);
    const Realization* rb = dataset.find_realization(a.realization_b);
    if (ra == nullptr) throw LinkError("annotation references unknown realization '" + a.realization_a + "'");
    if (rb == nullptr) throw LinkError("annotation references unknown realization '" + a.realization_b + "'");
    if (ra->scenario_id != rb->scenario_id) {
      throw ValidationError("annotated pair ('" + a.realization_a + "', '" + a.realization_b +
                            "') spans scenarios '" + ra->scenario_id + "' and '" + rb->scenario_id + "'");
    }
  }
}

namespace {

int require_column(const Table& t, std::string_view name, const std::string& source) {
  const int c = t.column(name);
  if (c < 0) throw ParseError(source + ": missing column '" + std::string(name) + "'");
  return c;
}

const std::string& field(const TableRow& row, int col) { return row.fields[static_cast<std::size_t>(col)]; }

}  // namespace

std::vector<Annotation> parse_annotations_mapped(std::string_view text, const AnnotationColumns& columns,
                                                 const std::string& source) {
  const Table t = parse_table(text, source);
  const int c_ann = require_column(t, columns.annotator, source);
  const int c_a = require_column(t, columns.first, source);
  const int c_b = require_column(t, columns.second, source);
  const int c_choice = require_column(t, columns.choice, source);
  const int c_time = t.column("timestamp");
  const int c_id = t.column("annotation_id");
  std::vector<Annotation> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    const std::string where = source + ":" + std::to_string(row.line);
    Annotation a;
    a.annotator_id = field(row, c_ann);
    a.realization_a = field(row, c_a);
    a.realization_b = field(row, c_b);
    const auto& token = field(row, c_choice);
    const auto has = [&](const std::vector<std::string>& v) { return std::find(v.begin(), v.end(), token) != v.end(); };
    if (has(columns.first_tokens)) {
      a.choice = Choice::a;
    } else if (has(columns.second_tokens)) {
      a.choice = Choice::b;
    } else {
      throw ParseError(where + ": unrecognized choice '" + token + "'");
    }
    if (a.annotator_id.empty() || a.realization_a.empty() || a.realization_b.empty()) {
      throw ParseError(where + ": empty annotator or realization id");
    }
    if (a.realization_a == a.realization_b) throw ParseError(where + ": pair compares a realization with itself");
    if (c_time >= 0) a.timestamp = field(row, c_time);
    if (c_id >= 0) a.annotation_id = field(row, c_id);
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Annotation> parse_annotations(std::string_view text, const std::string& source) {
  AnnotationColumns strict;
  strict.first_tokens = {"a"};
  strict.second_tokens = {"b"};
  return parse_annotations_mapped(text, strict, source);
}

std::vector<Annotation> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_file(path), path.string());
}

AnnotationColumns parse_annotation_columns(std::string_view text, const std::string& source) {
  AnnotationColumns c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ParseError(where + ": expected 'key = value'");
    const std::string key(trim(view.substr(0, eq)));
    const std::string value(trim(view.substr(eq + 1)));
    if (key == "annotator") {
      c.annotator = value;
    } else if (key == "first") {
      c.first = value;
    } else if (key == "second") {
      c.second = value;
    } else if (key == "choice") {
      c.choice = value;
    } else if (key == "first_tokens") {
      c.first_tokens = split(value, ',');
    } else if (key == "second_tokens") {
      c.second_tokens = split(value, ',');
    } else {
      throw ParseError(where + ": unknown key '" + key + "'");
    }
  }
  return c;
}

std::string annotations_to_csv(const std::vector<Annotation>& annotations) {
  std::ostringstream os;
  os << "annotator_id,realization_a,realization_b,choice,timestamp,annotation_id\n";
  for (const auto& a : annotations) {
    os << a.annotator_id << ',' << a.realization_a << ',' << a.realization_b << ','
       << (a.choice == Choice::a ? "a" : "b") << ',' << a.timestamp << ',' << a.annotation_id << '\n';
  }
  return os.str();
}

double BTScores::at(std::string_view id) const {
  const auto it = score.find(std::string(id));
  if (it == score.end()) throw LinkError("no Bradley-Terry score for '" + std::string(id) + "'");
  return it->second;
}

BTScores fit_bradley_terry(const std::vector<PairStats>& stats, const std::vector<std::string>& items,
                           const BTOptions& options) {
  std::map<std::string, std::size_t> index;
  for (const auto& s : stats) {
    index.emplace(s.pair.first, 0);
    index.emplace(s.pair.second, 0);
  }
  for (const auto& id : items) index.emplace(id, 0);
  std::vector<std::string> names;
  for (auto& [id, i] : index) {
    i = names.size();
    names.push_back(id);
  }
  const std::size_t n = names.size();

  struct Edge {
    std::size_t i, j;
    double n_ij;  // total comparisons
  };
  std::vector<Edge> edges;
  std::vector<double> wins(n, 0.0);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& s : stats) {
    const double total = static_cast<double>(s.n_first + s.n_second);
    if (total == 0.0) continue;
    const std::size_t i = index.at(s.pair.first);
    const std::size_t j = index.at(s.pair.second);
    edges.push_back({i, j, total});
    wins[i] += static_cast<double>(s.n_first);
    wins[j] += static_cast<double>(s.n_second);
    const std::size_t ri = find(i);
    const std::size_t rj = find(j);
    if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
  }

  std::vector<std::size_t> comp(n);
  std::map<std::size_t, std::size_t> comp_ids;
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find(i);
    comp[i] = comp_ids.emplace(root, comp_ids.size()).first->second;
  }
  const std::size_t n_comp = comp_ids.size();
  std::vector<bool> clamped(n_comp, false);

  std::vector<double> theta(n, 0.0);
  std::vector<double> denom(n);
  std::vector<double> next(n);

  // Shift each component to mean 0, then clamp; a few rounds settle both.
  const auto normalize = [&](std::vector<double>& th) {
    for (int round = 0; round < 4; ++round) {
      std::vector<double> sum(n_comp, 0.0);
      std::vector<double> cnt(n_comp, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(th[i])) continue;
        sum[comp[i]] += th[i];
        cnt[comp[i]] += 1.0;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (std::isfinite(th[i]) && cnt[comp[i]] > 0.0) th[i] -= sum[comp[i]] / cnt[comp[i]];
        if (th[i] > options.clamp || th[i] < -options.clamp) {
          th[i] = std::clamp(th[i], -options.clamp, options.clamp);
          clamped[comp[i]] = true;
        }
      }
    }
  };

  BTScores out;
  for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
    std::fill(denom.begin(), denom.end(), 0.0);
    for (const auto& e : edges) {
      // n_ij / (p_i + p_j), evaluated stably in log space.
      const double m = std::max(theta[e.i], theta[e.j]);
      const double inv = e.n_ij / std::exp(m + std::log(std::exp(theta[e.i] - m) + std::exp(theta[e.j] - m)));
      denom[e.i] += inv;
      denom[e.j] += inv;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (denom[i] == 0.0) {
        next[i] = 0.0;
      } else if (wins[i] == 0.0) {
        next[i] = -std::numeric_limits<double>::infinity();
      } else {
        next[i] = std::log(wins[i]) - std::log(denom[i]);
      }
    }
    normalize(next);
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::abs(next[i] - theta[i]));
    theta.swap(next);
    out.iterations = iter;
    if (delta < options.tolerance) {
      out.converged = true;
      break;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    out.score[names[i]] = theta[i] == 0.0 ? 0.0 : theta[i];
    out.component[names[i]] = comp[i];
  }
  for (std::size_t c = 0; c < n_comp; ++c) {
    if (clamped[c]) out.flagged_components.push_back(c);
  }
  return out;
}

std::array<double, kRuleCount> LabeledPair::features() const {
  std::array<double, kRuleCount> f{};
  for (std::size_t i = 0; i < kRuleCount; ++i) f[i] = lhs[i] - rhs[i];
  return f;
}

LabelSet make_labeled_pairs(const std::vector<PairStats>& stats, const BTScores& scores,
                            const std::map<std::string, RealizationInfo>& realizations) {
  LabelSet out;
  const auto info = [&](const std::string& id) -> const RealizationInfo& {
    const auto it = realizations.find(id);
    if (it == realizations.end()) throw LinkError("no violation vector for realization '" + id + "'");
    return it->second;
  };
  for (const auto& s : stats) {
    const auto& a = info(s.pair.first);
    const auto& b = info(s.pair.second);
    const double sa = scores.at(s.pair.first);
    const double sb = scores.at(s.pair.second);
    if (sa == sb) {
      ++out.excluded_ties;
      continue;
    }
    LabeledPair p;
    p.first = s.pair.first;
    p.second = s.pair.second;
    p.scenario_id = a.scenario_id;
    p.label = sa > sb ? 1 : -1;
    p.agreement = s.agreement;
    p.lhs = a.vector;
    p.rhs = b.vector;
    LabeledPair m = p;
    std::swap(m.first, m.second);
    std::swap(m.lhs, m.rhs);
    m.label = -p.label;
    m.mirrored = true;
    out.pairs.push_back(std::move(p));
    out.pairs.push_back(std::move(m));
  }
  return out;
}

std::string labeled_pairs_to_csv(const std::vector<LabeledPair>& pairs) {
  std::ostringstream os;
  os << "first,second,scenario_id,label,agreement,mirrored";
  for (std::size_t i = 0; i < kRuleCount; ++i) os << ",lhs_r" << (i + 1);
  for (std::size_t i = 0; i < kRuleCount; ++i) os << ",rhs_r" << (i + 1);
  os << '\n';
  for (const auto& p : pairs) {
    os << p.first << ',' << p.second << ',' << p.scenario_id << ',' << p.label << ',' << format_double(p.agreement)
       << ',' << (p.mirrored ? 1 : 0);
    for (std::size_t i = 0; i < kRuleCount; ++i) os << ',' << format_double(p.lhs[i]);
    for (std::size_t i = 0; i < kRuleCount; ++i) os << ',' << format_double(p.rhs[i]);
    os << '\n';
  }
  return os.str();
}

std::vector<LabeledPair> parse_labeled_pairs(std::string_view text, const std::string& source) {
  const Table t = parse_table(text, source);
  const int c_first = require_column(t, "first", source);
  const int c_second = require_column(t, "second", source);
  const int c_scenario = require_column(t, "scenario_id", source);
  const int c_label = require_column(t, "label", source);
  const int c_agree = require_column(t, "agreement", source);
  const int c_mirror = require_column(t, "mirrored", source);
  std::array<int, kRuleCount> c_lhs{};
  std::array<int, kRuleCount> c_rhs{};
  for (std::size_t i = 0; i < kRuleCount; ++i) {
    c_lhs[i] = require_column(t, "lhs_r" + std::to_string(i + 1), source);
    c_rhs[i] = require_column(t, "rhs_r" + std::to_string(i + 1), source);
  }
  std::vector<LabeledPair> out;
  for (const auto& row : t.rows) {
    const std::string where = source + ":" + std::to_string(row.line);
    LabeledPair p;
    p.first = field(row, c_first);
    p.second = field(row, c_second);
    p.scenario_id = field(row, c_scenario);
    const auto label = parse_int(field(row, c_label), where);
    if (label != 1 && label != -1) throw ParseError(where + ": label must be 1 or -1");
    p.label = static_cast<int>(label);
    p.agreement = parse_double(field(row, c_agree), where);
    p.mirrored = parse_int(field(row, c_mirror), where) != 0;
    for (std::size_t i = 0; i < kRuleCount; ++i) {
      p.lhs[i] = parse_double(field(row, c_lhs[i]), where);
      p.rhs[i] = parse_double(field(row, c_rhs[i]), where);
      if (!std::isfinite(p.lhs[i]) || !std::isfinite(p.rhs[i])) throw ParseError(where + ": non-finite feature");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string pair_stats_to_csv(const std::vector<PairStats>& stats) {
  std::ostringstream os;
  os << "realization_a,realization_b,n_a,n_b,agreement\n";
  for (const auto& s : stats) {
    os << s.pair.first << ',' << s.pair.second << ',' << s.n_first << ',' << s.n_second << ','
       << format_double(s.agreement) << '\n';
  }
  return os.str();
}

std::string bt_scores_to_csv(const BTScores& scores) {
  std::set<std::size_t> flagged(scores.flagged_components.begin(), scores.flagged_components.end());
  std::ostringstream os;
  os << "realization_id,score,component,clamped\n";
  for (const auto& [id, s] : scores.score) {
    const std::size_t c = scores.component.at(id);
    os << id << ',' << format_double(s) << ',' << c << ',' << (flagged.count(c) ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace rulebench
