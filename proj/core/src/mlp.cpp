#include <cmath>

#include "rulebench/error.hpp"
#include "rulebench/learners.hpp"
#include "rulebench/rng.hpp"

namespace rulebench {

std::size_t mlp_parameter_count(std::size_t dim, std::size_t hidden) { return hidden * dim + 2 * hidden + 1; }

namespace {

struct View {
  std::size_t dim, hidden;
  std::size_t w1() const { return 0; }
  std::size_t b1() const { return hidden * dim; }
  std::size_t w2() const { return hidden * dim + hidden; }
  std::size_t b2() const { return hidden * dim + 2 * hidden; }
};

double forward(const View& v, std::span<const double> p, std::span<const double> x, std::span<double> activations) {
  double out = p[v.b2()];
  for (std::size_t h = 0; h < v.hidden; ++h) {
    double a = p[v.b1() + h];
    const double* row = p.data() + v.w1() + h * v.dim;
    for (std::size_t k = 0; k < v.dim; ++k) a += row[k] * x[k];
    const double z = std::tanh(a);
    if (!activations.empty()) activations[h] = z;
    out += p[v.w2() + h] * z;
  }
  return out;
}

}  // namespace

double Mlp::probability(std::span<const double> x) const {
  if (x.size() != dim) throw ValidationError("input dimension mismatch");
  return sigmoid(forward({dim, hidden}, params, x, {}));
}

double mlp_objective(const Samples& data, std::size_t hidden, std::span<const double> params, double lambda,
                     std::span<double> grad) {
  const View v{data.dim, hidden};
  if (params.size() != mlp_parameter_count(data.dim, hidden)) throw ValidationError("parameter count mismatch");
  std::vector<double> z(hidden);
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    const double y = static_cast<double>(data.y[i]);
    const double o = forward(v, params, x, z);
    const double m = y * o;
    loss += m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    if (grad.empty()) continue;
    const double d_out = -y * sigmoid(-m);
    grad[v.b2()] += d_out;
    for (std::size_t h = 0; h < hidden; ++h) {
      grad[v.w2() + h] += d_out * z[h];
      const double d_a = d_out * params[v.w2() + h] * (1.0 - z[h] * z[h]);
      grad[v.b1() + h] += d_a;
      double* row = grad.data() + v.w1() + h * v.dim;
      for (std::size_t k = 0; k < v.dim; ++k) row[k] += d_a * x[k];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(data.size());
  double reg = 0.0;
  const auto weight = [&](std::size_t j) { return j < v.b1() || (j >= v.w2() && j < v.b2()); };
  for (std::size_t j = 0; j < params.size(); ++j) {
    if (weight(j)) reg += params[j] * params[j];
  }
  if (!grad.empty()) {
    for (std::size_t j = 0; j < params.size(); ++j) {
      grad[j] = grad[j] * inv_n + (weight(j) ? lambda * params[j] : 0.0);
    }
  }
  return loss * inv_n + 0.5 * lambda * reg;
}

Mlp train_mlp(const Samples& data, std::size_t hidden, double learning_rate, std::size_t epochs, double lambda,
              std::uint64_t seed) {
  data.validate();
  if (hidden == 0) throw ValidationError("hidden units must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be > 0");
  const View v{data.dim, hidden};
  Mlp m;
  m.dim = data.dim;
  m.hidden = hidden;
  m.params.assign(mlp_parameter_count(data.dim, hidden), 0.0);
  Rng rng(seed);
  const double r1 = std::sqrt(6.0 / static_cast<double>(data.dim + hidden));
  const double r2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (std::size_t j = 0; j < v.b1(); ++j) m.params[j] = rng.uniform(-r1, r1);
  for (std::size_t h = 0; h < hidden; ++h) m.params[v.w2() + h] = rng.uniform(-r2, r2);

  // Full-batch Adam.
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  std::vector<double> grad(m.params.size());
  std::vector<double> m1(m.params.size(), 0.0);
  std::vector<double> m2(m.params.size(), 0.0);
  double b1t = 1.0;
  double b2t = 1.0;
  for (std::size_t e = 0; e < epochs; ++e) {
    mlp_objective(data, hidden, m.params, lambda, grad);
    b1t *= beta1;
    b2t *= beta2;
    for (std::size_t j = 0; j < m.params.size(); ++j) {
      m1[j] = beta1 * m1[j] + (1.0 - beta1) * grad[j];
      m2[j] = beta2 * m2[j] + (1.0 - beta2) * grad[j] * grad[j];
      const double mh = m1[j] / (1.0 - b1t);
      const double vh = m2[j] / (1.0 - b2t);
      m.params[j] -= learning_rate * mh / (std::sqrt(vh) + eps);
    }
  }
  return m;
}

}  // namespace rulebench
