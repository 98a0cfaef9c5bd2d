#include <cmath>
#include <limits>

#include "rulebench/error.hpp"
#include "rulebench/learners.hpp"

namespace rulebench {

namespace {

int bit(double v) { return v > 0.0 ? 1 : 0; }
int cls(int label) { return label > 0 ? 1 : 0; }

}  // namespace

std::vector<double> conditional_mutual_information(const Samples& data) {
  data.validate();
  const std::size_t d = data.dim;
  const double n = static_cast<double>(data.size());
  std::vector<double> cmi(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      double joint[2][2][2] = {};  // [c][bi][bj]
      for (std::size_t s = 0; s < data.size(); ++s) {
        joint[cls(data.y[s])][bit(data.x[s * d + i])][bit(data.x[s * d + j])] += 1.0;
      }
      double total = 0.0;
      for (int c = 0; c < 2; ++c) {
        const double nc = joint[c][0][0] + joint[c][0][1] + joint[c][1][0] + joint[c][1][1];
        if (nc == 0.0) continue;
        for (int a = 0; a < 2; ++a) {
          const double na = joint[c][a][0] + joint[c][a][1];
          for (int b = 0; b < 2; ++b) {
            const double nab = joint[c][a][b];
            if (nab == 0.0) continue;
            const double nb = joint[c][0][b] + joint[c][1][b];
            total += (nab / n) * std::log(nab * nc / (na * nb));
          }
        }
      }
      cmi[i * d + j] = cmi[j * d + i] = std::max(0.0, total);
    }
  }
  return cmi;
}

TanClassifier train_tan(const Samples& data, double alpha) {
  data.validate();
  if (!(alpha > 0.0)) throw ValidationError("Laplace alpha must be > 0");
  const std::size_t d = data.dim;
  const auto cmi = conditional_mutual_information(data);

  // Prim's maximum spanning tree rooted at feature 0.
  TanClassifier m;
  m.dim = d;
  m.parent.assign(d, -1);
  std::vector<bool> in_tree(d, false);
  std::vector<double> best(d, -std::numeric_limits<double>::infinity());
  std::vector<int> best_from(d, -1);
  in_tree[0] = true;
  for (std::size_t j = 1; j < d; ++j) {
    best[j] = cmi[j];
    best_from[j] = 0;
  }
  for (std::size_t step = 1; step < d; ++step) {
    std::size_t pick = d;
    for (std::size_t j = 0; j < d; ++j) {
      if (!in_tree[j] && (pick == d || best[j] > best[pick])) pick = j;
    }
    in_tree[pick] = true;
    m.parent[pick] = best_from[pick];
    for (std::size_t j = 0; j < d; ++j) {
      if (!in_tree[j] && cmi[pick * d + j] > best[j]) {
        best[j] = cmi[pick * d + j];
        best_from[j] = static_cast<int>(pick);
      }
    }
  }

  double class_count[2] = {0.0, 0.0};
  for (const int y : data.y) class_count[cls(y)] += 1.0;
  const double n = static_cast<double>(data.size());
  for (int c = 0; c < 2; ++c) m.log_prior[c] = std::log((class_count[c] + alpha) / (n + 2.0 * alpha));

  m.log_cpt.assign(d, {});
  for (std::size_t i = 0; i < d; ++i) {
    double counts[2][2][2] = {};  // [c][parent value][value]
    for (std::size_t s = 0; s < data.size(); ++s) {
      const int pv = m.parent[i] < 0 ? 0 : bit(data.x[s * d + static_cast<std::size_t>(m.parent[i])]);
      counts[cls(data.y[s])][pv][bit(data.x[s * d + i])] += 1.0;
    }
    for (int c = 0; c < 2; ++c) {
      for (int pv = 0; pv < 2; ++pv) {
        const int src = m.parent[i] < 0 ? 0 : pv;
        const double denom = counts[c][src][0] + counts[c][src][1] + 2.0 * alpha;
        for (int v = 0; v < 2; ++v) {
          m.log_cpt[i][static_cast<std::size_t>(c * 4 + pv * 2 + v)] = std::log((counts[c][src][v] + alpha) / denom);
        }
      }
    }
  }
  return m;
}

double TanClassifier::positive_probability(std::span<const double> x) const {
  if (x.size() != dim) throw ValidationError("input dimension mismatch");
  double score[2] = {log_prior[0], log_prior[1]};
  for (std::size_t i = 0; i < dim; ++i) {
    const int v = bit(x[i]);
    const int pv = parent[i] < 0 ? 0 : bit(x[static_cast<std::size_t>(parent[i])]);
    for (int c = 0; c < 2; ++c) score[c] += log_cpt[i][static_cast<std::size_t>(c * 4 + pv * 2 + v)];
  }
  return sigmoid(score[1] - score[0]);
}

}  // namespace rulebench
