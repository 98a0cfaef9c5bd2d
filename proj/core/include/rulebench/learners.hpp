#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rulebench {

// Row-major design matrix with +-1 labels.
struct Samples {
  std::size_t dim = 0;
  std::vector<double> x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * dim, dim}; }
  void add(std::span<const double> features, int label);
  // Throws ValidationError on empty data, bad labels or non-finite values.
  void validate() const;
};

enum class ModelKind { LR, DT, RF, LSVM, RBFSVM, NN, BN };

inline constexpr std::array<ModelKind, 7> kAllModelKinds{ModelKind::LR,   ModelKind::DT,     ModelKind::RF,
                                                         ModelKind::LSVM, ModelKind::RBFSVM, ModelKind::NN,
                                                         ModelKind::BN};

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view s);

using Hyperparameters = std::map<std::string, double>;

struct ModelSpec {
  ModelKind kind = ModelKind::LR;
  Hyperparameters hyper;
  std::uint64_t seed = 0;
};

// ---- per-kind models -------------------------------------------------------

double sigmoid(double z);

struct LogisticModel {
  std::vector<double> w;
  double decision(std::span<const double> x) const;
};

// Mean binary cross-entropy of the bias-free logistic model plus
// lambda/2 |w|^2. Writes the gradient when `grad` is non-empty.
double logistic_objective(const Samples& data, std::span<const double> w, double lambda, std::span<double> grad);
LogisticModel train_logistic(const Samples& data, double lambda, std::size_t iterations);

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double positive_fraction = 0.5;
  std::size_t count = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  const TreeNode& leaf(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
  std::size_t depth() const;
};

struct TreeOptions {
  std::size_t max_depth = 4;
  std::size_t max_features = 0;  // 0: all features
  std::uint64_t seed = 0;        // feature subsampling
};

DecisionTree train_tree(const Samples& data, const TreeOptions& options);
// Gini impurity of a node with the given class counts.
double gini(double positives, double negatives);

struct RandomForest {
  std::vector<DecisionTree> trees;
  double positive_vote_fraction(std::span<const double> x) const;
};

RandomForest train_forest(const Samples& data, std::size_t trees, std::size_t max_depth, std::uint64_t seed);

struct LinearSvm {
  std::vector<double> w;
  double platt_slope = 1.0;  // P(+1 | x) = sigmoid(slope * w.x)
  double decision(std::span<const double> x) const;
};

LinearSvm train_linear_svm(const Samples& data, double c, std::uint64_t seed);

struct RbfSvm {
  double gamma = 1.0;
  std::size_t dim = 0;
  std::vector<double> support;       // row-major support vectors
  std::vector<double> coefficients;  // alpha_i * y_i
  double platt_slope = 1.0;
  double decision(std::span<const double> x) const;
};

RbfSvm train_rbf_svm(const Samples& data, double c, double gamma);

// Fits P(+1 | f) = sigmoid(a f) by Newton's method on the log-likelihood.
double fit_platt_slope(std::span<const double> decisions, std::span<const int> labels);

struct Mlp {
  std::size_t dim = 0;
  std::size_t hidden = 0;
  // Layout: W1 (hidden x dim), b1 (hidden), w2 (hidden), b2.
  std::vector<double> params;
  double probability(std::span<const double> x) const;
};

std::size_t mlp_parameter_count(std::size_t dim, std::size_t hidden);
// Mean BCE plus lambda/2 of the squared weights (biases excluded).
double mlp_objective(const Samples& data, std::size_t hidden, std::span<const double> params, double lambda,
                     std::span<double> grad);
Mlp train_mlp(const Samples& data, std::size_t hidden, double learning_rate, std::size_t epochs, double lambda,
              std::uint64_t seed);

// Tree-augmented naive Bayes over binarized features b_i = [x_i > 0].
struct TanClassifier {
  std::size_t dim = 0;
  std::vector<int> parent;  // -1 for the root
  double log_prior[2] = {0.0, 0.0};  // index 0: -1, index 1: +1
  // log P(b_i | b_parent, c), indexed [i][c*4 + parent_value*2 + value]; the
  // root ignores parent_value.
  std::vector<std::array<double, 8>> log_cpt;
  double positive_probability(std::span<const double> x) const;
};

// Conditional mutual information I(b_i; b_j | c) from empirical counts.
std::vector<double> conditional_mutual_information(const Samples& data);
TanClassifier train_tan(const Samples& data, double alpha = 1.0);

// ---- dispatch --------------------------------------------------------------

struct TrainedModel {
  ModelKind kind = ModelKind::LR;
  std::variant<LogisticModel, DecisionTree, RandomForest, LinearSvm, RbfSvm, Mlp, TanClassifier> model;
  std::map<std::string, std::string> metadata;
};

TrainedModel train(const ModelSpec& spec, const Samples& data);
// Signed score whose sign is the prediction; 0 maps to +1.
double decision_value(const TrainedModel& m, std::span<const double> x);
int predict(const TrainedModel& m, std::span<const double> x);
// In [0, 1]; 0 = maximally unsure.
double confidence(const TrainedModel& m, std::span<const double> x);

std::string serialize(const TrainedModel& m);
TrainedModel deserialize(std::string_view text);

// ---- hyperparameter grids ---------------------------------------------------

struct ModelGrid {
  ModelKind kind = ModelKind::LR;
  std::vector<Hyperparameters> points;  // cartesian product, declared order
};

// JSON object: kind -> {parameter: [values...]}. The first parameter varies
// slowest.
std::vector<ModelGrid> parse_model_grids(std::string_view text, const std::string& source);
std::vector<ModelGrid> load_model_grids(const std::filesystem::path& path);
std::string default_model_grid_text();

}  // namespace rulebench
