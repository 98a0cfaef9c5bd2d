#include <algorithm>
#include <numeric>

#include "rulebench/error.hpp"
#include "rulebench/learners.hpp"
#include "rulebench/rng.hpp"

namespace rulebench {

double gini(double positives, double negatives) {
  const double n = positives + negatives;
  if (n <= 0.0) return 0.0;
  const double p = positives / n;
  return 2.0 * p * (1.0 - p);
}

const TreeNode& DecisionTree::leaf(std::span<const double> x) const {
  if (nodes.empty()) throw ValidationError("empty decision tree");
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto f = static_cast<std::size_t>(nodes[i].feature);
    if (f >= x.size()) throw ValidationError("input dimension mismatch");
    i = static_cast<std::size_t>(x[f] <= nodes[i].threshold ? nodes[i].left : nodes[i].right);
  }
  return nodes[i];
}

int DecisionTree::predict(std::span<const double> x) const { return leaf(x).positive_fraction >= 0.5 ? 1 : -1; }

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t best = 0;
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes[i].feature >= 0) {
      stack.push_back({static_cast<std::size_t>(nodes[i].left), d + 1});
      stack.push_back({static_cast<std::size_t>(nodes[i].right), d + 1});
    }
  }
  return best;
}

namespace {

struct Builder {
  const Samples& data;
  TreeOptions options;
  Rng rng;
  DecisionTree tree;
  std::vector<std::pair<double, int>> scratch;
  std::vector<std::size_t> features;

  int build(std::vector<std::size_t>& idx, std::size_t depth) {
    double pos = 0.0;
    for (const auto i : idx) pos += data.y[i] > 0 ? 1.0 : 0.0;
    const double n = static_cast<double>(idx.size());
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.back().positive_fraction = pos / n;
    tree.nodes.back().count = idx.size();

    const double parent = gini(pos, n - pos);
    if (depth >= options.max_depth || parent == 0.0 || idx.size() < 2) return node_id;

    std::vector<std::size_t> candidates = features;
    const std::size_t k = options.max_features == 0 ? candidates.size() : std::min(options.max_features, candidates.size());
    if (k < candidates.size()) {
      for (std::size_t j = 0; j < k; ++j) std::swap(candidates[j], candidates[j + rng.index(candidates.size() - j)]);
      candidates.resize(k);
      std::sort(candidates.begin(), candidates.end());
    }

    double best_impurity = parent - 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (const std::size_t f : candidates) {
      scratch.clear();
      for (const auto i : idx) scratch.emplace_back(data.x[i * data.dim + f], data.y[i]);
      std::sort(scratch.begin(), scratch.end());
      double left_pos = 0.0;
      for (std::size_t j = 0; j + 1 < scratch.size(); ++j) {
        left_pos += scratch[j].second > 0 ? 1.0 : 0.0;
        if (scratch[j].first == scratch[j + 1].first) continue;
        const double nl = static_cast<double>(j + 1);
        const double nr = n - nl;
        const double impurity = (nl * gini(left_pos, nl - left_pos) + nr * gini(pos - left_pos, nr - (pos - left_pos))) / n;
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (scratch[j].first + scratch[j + 1].first);
        }
      }
    }
    if (best_feature < 0) return node_id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (const auto i : idx) {
      (data.x[i * data.dim + static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return node_id;
  }
};

}  // namespace

DecisionTree train_tree(const Samples& data, const TreeOptions& options) {
  data.validate();
  Builder b{data, options, Rng(options.seed), {}, {}, {}};
  b.features.resize(data.dim);
  std::iota(b.features.begin(), b.features.end(), 0);
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  b.build(idx, 0);
  return std::move(b.tree);
}

}  // namespace rulebench
