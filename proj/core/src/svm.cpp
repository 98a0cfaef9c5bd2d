#include <algorithm>
#include <cmath>
#include <numeric>

#include "rulebench/error.hpp"
#include "rulebench/learners.hpp"
#include "rulebench/rng.hpp"

namespace rulebench {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

double fit_platt_slope(std::span<const double> decisions, std::span<const int> labels) {
  // Platt's smoothed targets keep the optimum finite on separable data.
  double n_pos = 0.0;
  for (const int y : labels) n_pos += y > 0 ? 1.0 : 0.0;
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
  const double t_neg = 1.0 / (n_neg + 2.0);
  const auto loss = [&](double a) {
    double l = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double t = labels[i] > 0 ? t_pos : t_neg;
      const double z = a * decisions[i];
      // -(t log s(z) + (1-t) log(1-s(z))) = log(1+e^z) - t z
      l += (z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - t * z;
    }
    return l;
  };
  double a = 0.0;
  double current = loss(a);
  for (int it = 0; it < 100; ++it) {
    double g = 0.0;
    double h = 1e-12;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double t = labels[i] > 0 ? t_pos : t_neg;
      const double p = sigmoid(a * decisions[i]);
      g += (p - t) * decisions[i];
      h += p * (1.0 - p) * decisions[i] * decisions[i];
    }
    double step = g / h;
    double next = a - step;
    double next_loss = loss(next);
    while (next_loss > current && std::abs(step) > 1e-12) {
      step *= 0.5;
      next = a - step;
      next_loss = loss(next);
    }
    if (std::abs(next - a) < 1e-10 * (1.0 + std::abs(a))) {
      a = next;
      break;
    }
    a = next;
    current = next_loss;
  }
  return a;
}

double LinearSvm::decision(std::span<const double> x) const {
  if (x.size() != w.size()) throw ValidationError("input dimension mismatch");
  return dot(w, x);
}

LinearSvm train_linear_svm(const Samples& data, double c, std::uint64_t seed) {
  data.validate();
  if (!(c > 0.0)) throw ValidationError("C must be > 0");
  const std::size_t n = data.size();
  const std::size_t d = data.dim;
  // Pegasos on lambda/2 |w|^2 + mean hinge, lambda = 1 / (C n).
  const double lambda = 1.0 / (c * static_cast<double>(n));
  const std::size_t total = 50 * n;
  const std::size_t average_from = total / 2;
  Rng rng(seed);
  std::vector<double> w(d, 0.0);
  std::vector<double> avg(d, 0.0);
  const double radius = 1.0 / std::sqrt(lambda);
  for (std::size_t t = 1; t <= total; ++t) {
    const std::size_t i = rng.index(n);
    const auto xi = data.row(i);
    const double yi = static_cast<double>(data.y[i]);
    const double eta = 1.0 / (lambda * static_cast<double>(t));
    const bool active = yi * dot(w, xi) < 1.0;
    const double shrink = 1.0 - eta * lambda;
    double norm_sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      w[k] = shrink * w[k] + (active ? eta * yi * xi[k] : 0.0);
      norm_sq += w[k] * w[k];
    }
    if (norm_sq > radius * radius) {
      const double s = radius / std::sqrt(norm_sq);
      for (auto& v : w) v *= s;
    }
    if (t > average_from) {
      for (std::size_t k = 0; k < d; ++k) avg[k] += w[k];
    }
  }
  LinearSvm m;
  m.w.resize(d);
  const double count = static_cast<double>(total - average_from);
  for (std::size_t k = 0; k < d; ++k) m.w[k] = avg[k] / count;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = m.decision(data.row(i));
  m.platt_slope = fit_platt_slope(f, data.y);
  return m;
}

double RbfSvm::decision(std::span<const double> x) const {
  if (x.size() != dim) throw ValidationError("input dimension mismatch");
  double f = 0.0;
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    f += coefficients[j] * std::exp(-gamma * squared_distance({support.data() + j * dim, dim}, x));
  }
  return f;
}

RbfSvm train_rbf_svm(const Samples& data, double c, double gamma) {
  data.validate();
  if (!(c > 0.0) || !(gamma > 0.0)) throw ValidationError("C and gamma must be > 0");
  const std::size_t n = data.size();
  std::vector<double> kernel(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    kernel[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = std::exp(-gamma * squared_distance(data.row(i), data.row(j)));
      kernel[i * n + j] = k;
      kernel[j * n + i] = k;
    }
  }
  // Dual coordinate ascent on sum(alpha) - 1/2 sum alpha_i alpha_j y_i y_j K_ij,
  // 0 <= alpha <= C, no bias term.
  std::vector<double> alpha(n, 0.0);
  std::vector<double> f(n, 0.0);  // f_i = sum_j alpha_j y_j K_ij
  for (int epoch = 0; epoch < 1000; ++epoch) {
    double max_violation = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double yi = static_cast<double>(data.y[i]);
      const double g = 1.0 - yi * f[i];
      const double next = std::clamp(alpha[i] + g, 0.0, c);  // K_ii = 1
      const double delta = next - alpha[i];
      if (delta == 0.0) continue;
      max_violation = std::max(max_violation, std::abs(delta));
      alpha[i] = next;
      const double* row = kernel.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) f[j] += delta * yi * row[j];
    }
    if (max_violation < 1e-6) break;
  }
  RbfSvm m;
  m.gamma = gamma;
  m.dim = data.dim;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] <= 0.0) continue;
    const auto row = data.row(i);
    m.support.insert(m.support.end(), row.begin(), row.end());
    m.coefficients.push_back(alpha[i] * static_cast<double>(data.y[i]));
  }
  m.platt_slope = fit_platt_slope(f, data.y);
  return m;
}

}  // namespace rulebench
