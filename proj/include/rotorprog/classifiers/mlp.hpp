#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "rotorprog/dataset.hpp"
#include "rotorprog/rng.hpp"

namespace rotorprog {

struct MlpParams {
  int hidden = 32;
  int epochs = 1000;
  double learning_rate = 0.1;
};

/// One tanh hidden layer, softmax output. Weights are row-major:
/// w1 is hidden x inputs, w2 is outputs x hidden.
struct MlpModel {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<int> classes;
  std::vector<double> w1, b1, w2, b2;

  std::size_t outputs() const { return classes.size(); }

  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  /// Flat view order: w1, b1, w2, b2.
  double& parameter(std::size_t i) {
    if (i < w1.size()) return w1[i];
    i -= w1.size();
    if (i < b1.size()) return b1[i];
    i -= b1.size();
    if (i < w2.size()) return w2[i];
    return b2[i - w2.size()];
  }

  void forward(std::span<const double> x, std::vector<double>& h, std::vector<double>& p) const {
    h.assign(hidden, 0.0);
    for (std::size_t u = 0; u < hidden; ++u) {
      double z = b1[u];
      for (std::size_t j = 0; j < inputs; ++j) z += w1[u * inputs + j] * x[j];
      h[u] = std::tanh(z);
    }
    p.assign(outputs(), 0.0);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t o = 0; o < outputs(); ++o) {
      double z = b2[o];
      for (std::size_t u = 0; u < hidden; ++u) z += w2[o * hidden + u] * h[u];
      p[o] = z;
      top = std::max(top, z);
    }
    double sum = 0.0;
    for (double& v : p) {
      v = std::exp(v - top);
      sum += v;
    }
    for (double& v : p) v /= sum;
  }

  int predict(std::span<const double> x) const {
    require(x.size() == inputs, ErrorKind::feature_mismatch, "mlp query width mismatch");
    std::vector<double> h, p;
    forward(x, h, p);
    return classes[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())];
  }
};

struct MlpGradient {
  double loss = 0.0;
  std::vector<double> w1, b1, w2, b2;

  double at(std::size_t i) const {
    if (i < w1.size()) return w1[i];
    i -= w1.size();
    if (i < b1.size()) return b1[i];
    i -= b1.size();
    if (i < w2.size()) return w2[i];
    return b2[i - w2.size()];
  }
};

/// Mean cross-entropy over the batch and its analytic gradient.
/// `targets` holds class indices into model.classes.
inline MlpGradient mlp_loss_gradient(const MlpModel& m, const Matrix& x, std::span<const int> targets) {
  MlpGradient g;
  g.w1.assign(m.w1.size(), 0.0);
  g.b1.assign(m.b1.size(), 0.0);
  g.w2.assign(m.w2.size(), 0.0);
  g.b2.assign(m.b2.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(x.rows);
  std::vector<double> h, p, dh(m.hidden);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto row = x.row(i);
    m.forward(row, h, p);
    const auto t = static_cast<std::size_t>(targets[i]);
    g.loss -= std::log(std::max(p[t], 1e-300)) * inv_n;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t o = 0; o < m.outputs(); ++o) {
      const double dz = (p[o] - (o == t ? 1.0 : 0.0)) * inv_n;
      g.b2[o] += dz;
      for (std::size_t u = 0; u < m.hidden; ++u) {
        g.w2[o * m.hidden + u] += dz * h[u];
        dh[u] += dz * m.w2[o * m.hidden + u];
      }
    }
    for (std::size_t u = 0; u < m.hidden; ++u) {
      const double dz = dh[u] * (1.0 - h[u] * h[u]);
      g.b1[u] += dz;
      for (std::size_t j = 0; j < m.inputs; ++j) g.w1[u * m.inputs + j] += dz * row[j];
    }
  }
  return g;
}

/// Glorot-uniform weights, zero biases.
inline MlpModel mlp_init(std::size_t inputs, std::vector<int> classes, int hidden, std::uint64_t seed) {
  require(hidden >= 1, ErrorKind::invalid_input, "hidden layer needs at least one unit");
  MlpModel m;
  m.inputs = inputs;
  m.hidden = static_cast<std::size_t>(hidden);
  m.classes = std::move(classes);
  Rng rng(seed);
  auto fill = [&](std::vector<double>& w, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : w) v = dist(rng);
  };
  m.w1.resize(m.hidden * inputs);
  m.w2.resize(m.outputs() * m.hidden);
  fill(m.w1, inputs, m.hidden);
  fill(m.w2, m.hidden, m.outputs());
  m.b1.assign(m.hidden, 0.0);
  m.b2.assign(m.outputs(), 0.0);
  return m;
}

/// Full-batch gradient descent on mean cross-entropy.
inline MlpModel mlp_train(const Matrix& x, std::span<const int> labels, MlpParams params,
                          std::uint64_t seed) {
  require(labels.size() == x.rows && x.rows > 0, ErrorKind::invalid_input,
          "labels not aligned with rows");
  require(params.epochs >= 0, ErrorKind::invalid_input, "epochs must be >= 0");
  auto classes = distinct_labels(labels);
  require(classes.size() >= 2, ErrorKind::invalid_labels, "mlp needs at least 2 classes");
  std::vector<int> targets(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    targets[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), labels[i]) - classes.begin());

  MlpModel m = mlp_init(x.cols, std::move(classes), params.hidden, seed);
  const std::size_t count = m.parameter_count();
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    const auto g = mlp_loss_gradient(m, x, targets);
    if (!std::isfinite(g.loss))
      fail(ErrorKind::divergence, "mlp loss became non-finite at epoch " + std::to_string(epoch) +
                                      " (learning_rate=" + format_double(params.learning_rate) + ")");
    for (std::size_t i = 0; i < count; ++i) m.parameter(i) -= params.learning_rate * g.at(i);
  }
  return m;
}

}  // namespace rotorprog
