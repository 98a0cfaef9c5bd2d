#include "rulebench/learners.hpp"

#include <cmath>

#include "json.hpp"
#include "rulebench/error.hpp"
#include "rulebench/text_io.hpp"

namespace rulebench {

using json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 7> kKindNames{"LR", "DT", "RF", "LSVM", "RBFSVM", "NN", "BN"};

double hyper(const ModelSpec& spec, const std::string& name) {
  const auto it = spec.hyper.find(name);
  if (it == spec.hyper.end()) {
    throw ConfigError(std::string(to_string(spec.kind)) + " needs hyperparameter '" + name + "'");
  }
  if (!std::isfinite(it->second)) throw ConfigError("hyperparameter '" + name + "' is not finite");
  return it->second;
}

std::size_t count_hyper(const ModelSpec& spec, const std::string& name) {
  const double v = hyper(spec, name);
  if (v < 1.0 || v != std::floor(v)) throw ConfigError("hyperparameter '" + name + "' must be a positive integer");
  return static_cast<std::size_t>(v);
}

void check_input(std::span<const double> x) {
  for (const double v : x) {
    if (!std::isfinite(v)) throw ValidationError("non-finite input feature");
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

ModelKind model_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<ModelKind>(i);
  }
  throw LookupError("unknown model kind '" + std::string(s) + "'");
}

TrainedModel train(const ModelSpec& spec, const Samples& data) {
  data.validate();
  TrainedModel m;
  m.kind = spec.kind;
  m.metadata["seed"] = std::to_string(spec.seed);
  for (const auto& [k, v] : spec.hyper) m.metadata["hyper." + k] = format_double(v);
  switch (spec.kind) {
    case ModelKind::LR:
      m.model = train_logistic(data, hyper(spec, "lambda"), count_hyper(spec, "iterations"));
      m.metadata["method"] = "full-batch gradient descent";
      break;
    case ModelKind::DT:
      m.model = train_tree(data, {count_hyper(spec, "max_depth"), 0, spec.seed});
      m.metadata["method"] = "CART gini";
      break;
    case ModelKind::RF:
      m.model = train_forest(data, count_hyper(spec, "trees"), count_hyper(spec, "max_depth"), spec.seed);
      m.metadata["method"] = "bootstrap CART gini, sqrt(d) features per split";
      break;
    case ModelKind::LSVM:
      m.model = train_linear_svm(data, hyper(spec, "C"), spec.seed);
      m.metadata["method"] = "Pegasos subgradient descent, averaged iterate, Platt slope";
      break;
    case ModelKind::RBFSVM:
      m.model = train_rbf_svm(data, hyper(spec, "C"), hyper(spec, "gamma"));
      m.metadata["method"] = "dual coordinate ascent without bias, Platt slope";
      break;
    case ModelKind::NN:
      m.model = train_mlp(data, count_hyper(spec, "hidden"), hyper(spec, "learning_rate"), count_hyper(spec, "epochs"),
                          hyper(spec, "lambda"), spec.seed);
      m.metadata["method"] = "tanh hidden layer, full-batch Adam";
      break;
    case ModelKind::BN: {
      const auto it = spec.hyper.find("alpha");
      m.model = train_tan(data, it == spec.hyper.end() ? 1.0 : it->second);
      m.metadata["method"] = "tree-augmented naive Bayes, Chow-Liu over conditional MI";
      break;
    }
  }
  return m;
}

double decision_value(const TrainedModel& m, std::span<const double> x) {
  check_input(x);
  return std::visit(
      [&](const auto& model) -> double {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, LogisticModel> || std::is_same_v<T, LinearSvm> || std::is_same_v<T, RbfSvm>) {
          return model.decision(x);
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          return model.leaf(x).positive_fraction - 0.5;
        } else if constexpr (std::is_same_v<T, RandomForest>) {
          return model.positive_vote_fraction(x) - 0.5;
        } else if constexpr (std::is_same_v<T, Mlp>) {
          return model.probability(x) - 0.5;
        } else {
          return model.positive_probability(x) - 0.5;
        }
      },
      m.model);
}

int predict(const TrainedModel& m, std::span<const double> x) { return decision_value(m, x) >= 0.0 ? 1 : -1; }

double confidence(const TrainedModel& m, std::span<const double> x) {
  check_input(x);
  return std::visit(
      [&](const auto& model) -> double {
        using T = std::decay_t<decltype(model)>;
        double p = 0.5;
        if constexpr (std::is_same_v<T, LogisticModel>) {
          p = sigmoid(model.decision(x));
        } else if constexpr (std::is_same_v<T, LinearSvm> || std::is_same_v<T, RbfSvm>) {
          p = sigmoid(model.platt_slope * model.decision(x));
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          p = model.leaf(x).positive_fraction;
        } else if constexpr (std::is_same_v<T, RandomForest>) {
          p = model.positive_vote_fraction(x);
        } else if constexpr (std::is_same_v<T, Mlp>) {
          p = model.probability(x);
        } else if constexpr (std::is_same_v<T, TanClassifier>) {
          p = model.positive_probability(x);
        } else {
          throw CapabilityError("model kind has no confidence score");
        }
        return std::abs(2.0 * p - 1.0);
      },
      m.model);
}

// ---- serialization ----------------------------------------------------------

namespace {

json tree_to_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.positive_fraction, n.count}));
  }
  return nodes;
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree t;
  for (const auto& n : j) {
    TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.positive_fraction = n.at(4).get<double>();
    node.count = n.at(5).get<std::size_t>();
    t.nodes.push_back(node);
  }
  const auto size = static_cast<int>(t.nodes.size());
  for (const auto& n : t.nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)) {
      throw ParseError("model: tree child index out of range");
    }
  }
  if (t.nodes.empty()) throw ParseError("model: empty tree");
  return t;
}

}  // namespace

std::string serialize(const TrainedModel& m) {
  json j;
  j["format"] = "rulebench.model/1";
  j["kind"] = std::string(to_string(m.kind));
  j["metadata"] = json::object();
  for (const auto& [k, v] : m.metadata) j["metadata"][k] = v;
  json p;
  std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, LogisticModel>) {
          p["w"] = model.w;
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          p["nodes"] = tree_to_json(model);
        } else if constexpr (std::is_same_v<T, RandomForest>) {
          p["trees"] = json::array();
          for (const auto& t : model.trees) p["trees"].push_back(tree_to_json(t));
        } else if constexpr (std::is_same_v<T, LinearSvm>) {
          p["w"] = model.w;
          p["platt_slope"] = model.platt_slope;
        } else if constexpr (std::is_same_v<T, RbfSvm>) {
          p["gamma"] = model.gamma;
          p["dim"] = model.dim;
          p["support"] = model.support;
          p["coefficients"] = model.coefficients;
          p["platt_slope"] = model.platt_slope;
        } else if constexpr (std::is_same_v<T, Mlp>) {
          p["dim"] = model.dim;
          p["hidden"] = model.hidden;
          p["params"] = model.params;
        } else {
          p["dim"] = model.dim;
          p["parent"] = model.parent;
          p["log_prior"] = {model.log_prior[0], model.log_prior[1]};
          p["log_cpt"] = model.log_cpt;
        }
      },
      m.model);
  j["params"] = std::move(p);
  return j.dump(1) + "\n";
}

TrainedModel deserialize(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "rulebench.model/1") throw ParseError("model: unsupported format tag");
    TrainedModel m;
    m.kind = model_kind_from_string(j.at("kind").get<std::string>());
    for (const auto& [k, v] : j.at("metadata").items()) m.metadata[k] = v.get<std::string>();
    const json& p = j.at("params");
    switch (m.kind) {
      case ModelKind::LR:
        m.model = LogisticModel{p.at("w").get<std::vector<double>>()};
        break;
      case ModelKind::DT:
        m.model = tree_from_json(p.at("nodes"));
        break;
      case ModelKind::RF: {
        RandomForest f;
        for (const auto& t : p.at("trees")) f.trees.push_back(tree_from_json(t));
        m.model = std::move(f);
        break;
      }
      case ModelKind::LSVM:
        m.model = LinearSvm{p.at("w").get<std::vector<double>>(), p.at("platt_slope").get<double>()};
        break;
      case ModelKind::RBFSVM: {
        RbfSvm s;
        s.gamma = p.at("gamma").get<double>();
        s.dim = p.at("dim").get<std::size_t>();
        s.support = p.at("support").get<std::vector<double>>();
        s.coefficients = p.at("coefficients").get<std::vector<double>>();
        s.platt_slope = p.at("platt_slope").get<double>();
        if (s.support.size() != s.dim * s.coefficients.size()) throw ParseError("model: support size mismatch");
        m.model = std::move(s);
        break;
      }
      case ModelKind::NN: {
        Mlp n;
        n.dim = p.at("dim").get<std::size_t>();
        n.hidden = p.at("hidden").get<std::size_t>();
        n.params = p.at("params").get<std::vector<double>>();
        if (n.params.size() != mlp_parameter_count(n.dim, n.hidden)) throw ParseError("model: parameter count mismatch");
        m.model = std::move(n);
        break;
      }
      case ModelKind::BN: {
        TanClassifier t;
        t.dim = p.at("dim").get<std::size_t>();
        t.parent = p.at("parent").get<std::vector<int>>();
        t.log_prior[0] = p.at("log_prior").at(0).get<double>();
        t.log_prior[1] = p.at("log_prior").at(1).get<double>();
        t.log_cpt = p.at("log_cpt").get<std::vector<std::array<double, 8>>>();
        if (t.parent.size() != t.dim || t.log_cpt.size() != t.dim) throw ParseError("model: structure size mismatch");
        m.model = std::move(t);
        break;
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
}

}  // namespace rulebench
