#include <cmath>

#include "rulebench/error.hpp"
#include "rulebench/learners.hpp"

namespace rulebench {

void Samples::add(std::span<const double> features, int label) {
  if (dim == 0 && y.empty()) dim = features.size();
  if (features.size() != dim) throw ValidationError("sample dimension mismatch");
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(label);
}

void Samples::validate() const {
  if (y.empty()) throw ValidationError("training data is empty");
  if (dim == 0 || x.size() != dim * y.size()) throw ValidationError("malformed design matrix");
  for (const int label : y) {
    if (label != 1 && label != -1) throw ValidationError("labels must be +1 or -1");
  }
  for (const double v : x) {
    if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
  }
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// log(1 + exp(-z)) without overflow.
double softplus_neg(double z) { return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

}  // namespace

double LogisticModel::decision(std::span<const double> x) const {
  if (x.size() != w.size()) throw ValidationError("input dimension mismatch");
  return dot(w, x);
}

double logistic_objective(const Samples& data, std::span<const double> w, double lambda, std::span<double> grad) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim;
  double loss = 0.0;
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = data.row(i);
    const double margin = static_cast<double>(data.y[i]) * dot(w, xi);
    loss += softplus_neg(margin);
    if (!grad.empty()) {
      // d/dw log(1 + exp(-y w.x)) = -y x sigmoid(-y w.x)
      const double coef = -static_cast<double>(data.y[i]) * sigmoid(-margin);
      for (std::size_t k = 0; k < d; ++k) grad[k] += coef * xi[k];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double reg = 0.0;
  for (std::size_t k = 0; k < d; ++k) reg += w[k] * w[k];
  if (!grad.empty()) {
    for (std::size_t k = 0; k < d; ++k) grad[k] = grad[k] * inv_n + lambda * w[k];
  }
  return loss * inv_n + 0.5 * lambda * reg;
}

LogisticModel train_logistic(const Samples& data, double lambda, std::size_t iterations) {
  data.validate();
  if (lambda < 0.0) throw ValidationError("lambda must be >= 0");
  double mean_sq = 0.0;
  for (const double v : data.x) mean_sq += v * v;
  mean_sq /= static_cast<double>(data.size());
  // 1/L for the smoothness constant of the mean logistic loss.
  const double step = 1.0 / (0.25 * mean_sq + lambda + 1e-12);

  LogisticModel m;
  m.w.assign(data.dim, 0.0);
  std::vector<double> grad(data.dim);
  for (std::size_t it = 0; it < iterations; ++it) {
    logistic_objective(data, m.w, lambda, grad);
    for (std::size_t k = 0; k < data.dim; ++k) m.w[k] -= step * grad[k];
  }
  return m;
}

}  // namespace rulebench
