#include <cmath>

#include "rulebench/error.hpp"
#include "rulebench/learners.hpp"
#include "rulebench/rng.hpp"

namespace rulebench {

double RandomForest::positive_vote_fraction(std::span<const double> x) const {
  if (trees.empty()) throw ValidationError("empty random forest");
  std::size_t votes = 0;
  for (const auto& t : trees) votes += t.predict(x) > 0 ? 1 : 0;
  return static_cast<double>(votes) / static_cast<double>(trees.size());
}

RandomForest train_forest(const Samples& data, std::size_t trees, std::size_t max_depth, std::uint64_t seed) {
  data.validate();
  if (trees == 0) throw ValidationError("forest needs at least one tree");
  const auto max_features = static_cast<std::size_t>(std::max(1.0, std::round(std::sqrt(static_cast<double>(data.dim)))));
  RandomForest forest;
  forest.trees.reserve(trees);
  Samples boot;
  boot.dim = data.dim;
  for (std::size_t t = 0; t < trees; ++t) {
    Rng rng(mix_seed(seed, t));
    boot.x.clear();
    boot.y.clear();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::size_t j = rng.index(data.size());
      const auto row = data.row(j);
      boot.x.insert(boot.x.end(), row.begin(), row.end());
      boot.y.push_back(data.y[j]);
    }
    forest.trees.push_back(train_tree(boot, {max_depth, max_features, rng.next()}));
  }
  return forest;
}

}  // namespace rulebench
